mod common;

use std::sync::Arc;

use bne_core::domains::Domain;
use bne_core::mechanisms::{LlgMechanism, LlllggMechanism};
use bne_core::sampling::{
    build_game, derive_key, AuctionGame, Integrator, LlgSampler, LlllggSampler, MechanismGame, RngKind, SampleStream,
};
use bne_core::{ControlGrid, DomainKind, InterpolatedStrategy, InterpolationMode, LlgRule, LlllggRule, MechanismKey};
use bne_core::{Profile, Role, Strategy};
use proptest::prelude::*;

fn shaded(scale: f64, hi: f64, dims: usize) -> Arc<Strategy> {
    let grid = ControlGrid::uniform(&vec![0.0; dims], &vec![hi; dims], 5).unwrap();
    let s = InterpolatedStrategy::from_fn(grid, dims, InterpolationMode::Multilinear, |v| {
        v.iter().map(|x| scale * x * (1.0 - 0.1 * x)).collect()
    })
    .unwrap();
    Arc::new(Strategy::Interpolated(s))
}

fn llg_profile(local: f64, global: Option<f64>) -> Profile {
    let g = global.map_or(Arc::new(Strategy::Truthful), |s| shaded(s, 2.0, 1));
    Profile::new(vec![shaded(local, 1.0, 1), shaded(local, 1.0, 1), g])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn llg_tables_match_generic_estimator(
        rule_ix in 0usize..6, gamma in prop_oneof![Just(0.0), Just(0.5)], v in 0.0..1.0f64,
        bid in 0.0..1.2f64, local in 0.5..1.0f64, key in any::<u64>(),
    ) {
        let rule = LlgRule::ALL[rule_ix];
        let fast = build_game(DomainKind::Llg { alpha: 2.0, gamma }, MechanismKey::Llg(rule), Integrator::Mc, 1).unwrap();
        let role = if rule.global_truthful() { Role::FixedTruthful } else { Role::Independent };
        let slow = MechanismGame::new(
            Domain::llg(2.0, gamma, role).unwrap(),
            Arc::new(LlgMechanism::new(rule)),
            Box::new(LlgSampler::new(2.0, gamma).unwrap()),
        );
        let profile = llg_profile(local, (!rule.global_truthful()).then_some(0.8));
        let stream = SampleStream::keyed(RngKind::Sobol, 3, key).unwrap();
        let bidders: &[usize] = if rule.global_truthful() { &[0, 1] } else { &[0, 1, 2] };
        for &b in bidders {
            let val = if b == 2 { [2.0 * v] } else { [v] };
            let bid = if b == 2 { 2.0 * bid } else { bid };
            let a = fast.sample_table(b, &val, &profile, &stream, 500).unwrap().evaluate(&[bid]).unwrap();
            let c = slow.sample_table(b, &val, &profile, &stream, 500).unwrap().evaluate(&[bid]).unwrap();
            prop_assert!((a.win_prob[0] - c.win_prob[0]).abs() < 1e-12, "{:?} bidder {}", rule, b);
            prop_assert!((a.expected_payment - c.expected_payment).abs() < 1e-12, "{:?} bidder {}", rule, b);
        }
    }

    #[test]
    fn llllgg_threshold_table_matches_generic_estimator(
        v1 in 0.0..1.0f64, v2 in 0.0..1.0f64, b1 in 0.0..1.2f64, b2 in 0.0..1.2f64,
        g in 0.0..2.4f64, key in any::<u64>(),
    ) {
        let fast = build_game(DomainKind::Llllgg, MechanismKey::Llllgg(LlllggRule::FirstPrice), Integrator::Mc, 1).unwrap();
        let domain = Domain::llllgg();
        let slow = MechanismGame::new(
            domain.clone(),
            Arc::new(LlllggMechanism::new(LlllggRule::FirstPrice)),
            Box::new(LlllggSampler { value_hi: domain.value_hi.clone() }),
        );
        let locals = shaded(0.7, 1.0, 2);
        let globals = shaded(0.6, 2.0, 2);
        let profile = Profile::new(vec![locals.clone(), locals.clone(), locals.clone(), locals, globals.clone(), globals]);
        let stream = SampleStream::keyed(RngKind::Sobol, 10, key).unwrap();
        for (bidder, val, bid) in [(0, [v1, v2], [b1, b2]), (5, [2.0 * v1, 2.0 * v2], [g, b1])] {
            let a = fast.sample_table(bidder, &val, &profile, &stream, 300).unwrap().evaluate(&bid).unwrap();
            let c = slow.sample_table(bidder, &val, &profile, &stream, 300).unwrap().evaluate(&bid).unwrap();
            for k in 0..2 {
                prop_assert!((a.win_prob[k] - c.win_prob[k]).abs() < 1e-12);
            }
            prop_assert!((a.expected_payment - c.expected_payment).abs() < 1e-12);
        }
    }
}

#[test]
fn importance_sampling_is_unbiased() {
    common::check_importance_unbiased(4, 250_000).unwrap();
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    for gamma in [0.0, 0.5] {
        let setting = DomainKind::Llg { alpha: 2.0, gamma };
        let quad = build_game(setting, MechanismKey::Llg(LlgRule::Proxy), Integrator::Quadrature, 400).unwrap();
        let mc = build_game(setting, MechanismKey::Llg(LlgRule::Proxy), Integrator::McImportance, 1).unwrap();
        let profile = llg_profile(0.9, None);
        let stream = SampleStream::keyed(RngKind::Sobol, 3, derive_key(5, &[gamma.to_bits()])).unwrap();
        for (v, b) in [(0.3, 0.25), (0.8, 0.5), (1.0, 0.7)] {
            let q = quad.sample_table(0, &[v], &profile, &stream, 0).unwrap().evaluate(&[b]).unwrap().utility(&[v]);
            let m = mc.sample_table(0, &[v], &profile, &stream, 200_000).unwrap().evaluate(&[b]).unwrap().utility(&[v]);
            assert!((q - m).abs() < 2e-3, "gamma {gamma} v {v}: quadrature {q} vs MC {m}");
        }
    }
}

#[test]
fn decomposition_extrapolates_linearly() {
    // With independent values the table does not depend on the own value, so
    // the decomposition at one value predicts the utility at another exactly.
    for rule in [LlgRule::Proxy, LlgRule::FirstPrice] {
        let integrator = if rule == LlgRule::FirstPrice { Integrator::Mc } else { Integrator::McImportance };
        let game = build_game(DomainKind::Llg { alpha: 1.0, gamma: 0.0 }, MechanismKey::Llg(rule), integrator, 1).unwrap();
        let profile = llg_profile(0.8, (rule == LlgRule::FirstPrice).then_some(0.7));
        let stream = SampleStream::keyed(RngKind::Sobol, 3, 77).unwrap();
        for (w, w2, b) in [(0.2, 0.3, 0.15), (0.5, 0.9, 0.4), (0.0, 1.0, 0.3)] {
            let d = game.sample_table(0, &[w], &profile, &stream, 4096).unwrap().evaluate(&[b]).unwrap();
            let direct = game.sample_table(0, &[w2], &profile, &stream, 4096).unwrap().evaluate(&[b]).unwrap();
            assert!((d.utility(&[w2]) - direct.utility(&[w2])).abs() < 1e-12);
        }
    }
}

#[test]
fn stream_dimension_is_checked() {
    let game = build_game(DomainKind::Llg { alpha: 1.0, gamma: 0.0 }, MechanismKey::Llg(LlgRule::Proxy), Integrator::Mc, 1).unwrap();
    let stream = SampleStream::keyed(RngKind::Sobol, 2, 1).unwrap();
    assert!(game.sample_table(0, &[0.5], &Profile::truthful(3), &stream, 10).is_err());
    assert!(build_game(DomainKind::Llllgg, MechanismKey::Llllgg(LlllggRule::FirstPrice), Integrator::Quadrature, 8).is_err());
    assert!(build_game(DomainKind::Llg { alpha: 1.0, gamma: 0.0 }, MechanismKey::Llg(LlgRule::FirstPrice), Integrator::McImportance, 1).is_err());
}
