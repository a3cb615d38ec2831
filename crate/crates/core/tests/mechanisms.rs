mod common;

use bne_core::domains::Domain;
use bne_core::mechanisms::{core_constraints, llg_allocate, llg_payments, min_core_revenue, vcg_nearest_payments};
use bne_core::oracles::{brute_min_core_revenue, grid_llg_core_payments};
use bne_core::LlgRule;
use proptest::prelude::*;

fn llg_welfare(b1: f64, b2: f64, b3: f64) -> impl Fn(u64) -> f64 {
    move |c: u64| {
        let l = if c & 1 != 0 { b1 } else { 0.0 } + if c & 2 != 0 { b2 } else { 0.0 };
        l.max(if c & 4 != 0 { b3 } else { 0.0 })
    }
}

proptest! {
    #[test]
    fn llg_payments_are_individually_rational(b1 in 0.0..1.0f64, b2 in 0.0..1.0f64, b3 in 0.0..2.0f64) {
        let alloc = llg_allocate(b1, b2, b3);
        for rule in LlgRule::ALL {
            let p = llg_payments(rule, [b1, b2, b3], &alloc).unwrap();
            for (i, b) in [b1, b2, b3].into_iter().enumerate() {
                if alloc.assignments[i].is_empty() {
                    prop_assert_eq!(p[i], 0.0);
                } else {
                    prop_assert!(p[i] >= 0.0 && p[i] <= b + 1e-12, "{:?} pays {} on bid {}", rule, p[i], b);
                }
            }
            if b1 + b2 >= b3 && rule != LlgRule::Vcg && rule != LlgRule::FirstPrice {
                prop_assert!((p[0] + p[1] - b3).abs() < 1e-12, "{:?} revenue {}", rule, p[0] + p[1]);
            }
        }
    }

    #[test]
    fn llg_closed_form_matches_core_solver(b1 in 0.0..1.0f64, b2 in 0.0..1.0f64, b3 in 0.0..2.0f64) {
        prop_assume!(b1 + b2 >= b3);
        let cons = core_constraints(3, &[0, 1], &[b1, b2], llg_welfare(b1, b2, b3));
        let generic = vcg_nearest_payments(&[b1, b2], &cons).unwrap();
        let p = llg_payments(LlgRule::VcgNearest, [b1, b2, b3], &llg_allocate(b1, b2, b3)).unwrap();
        prop_assert!((generic.payments[0] - p[0]).abs() < 1e-9);
        prop_assert!((generic.payments[1] - p[1]).abs() < 1e-9);
        let (rev, _) = min_core_revenue(&[b1, b2], &cons).unwrap();
        let (brute, _) = brute_min_core_revenue(&[b1, b2], &cons).unwrap();
        prop_assert!((rev - brute).abs() < 1e-9);
    }

    #[test]
    fn llg_vcg_nearest_matches_grid_oracle(b1 in 0.05..1.0f64, b2 in 0.05..1.0f64, frac in 0.0..1.0f64) {
        let b3 = frac * (b1 + b2);
        let p = llg_payments(LlgRule::VcgNearest, [b1, b2, b3], &llg_allocate(b1, b2, b3)).unwrap();
        let g = grid_llg_core_payments(b1, b2, b3, 400);
        let step = (b1 + b2) / 400.0;
        let vcg = [(b3 - b2).max(0.0), (b3 - b1).max(0.0)];
        let dist = |q: &[f64]| (q[0] - vcg[0]).hypot(q[1] - vcg[1]);
        // Grid points off the face by up to the slack band can sit closer to
        // the target, so along the face the oracle is only sqrt(step)-accurate.
        prop_assert!(dist(&p) <= dist(&g) + 1e-12, "{:?} vs {:?}", g, p);
        let tol = 2.0 * step + (4.0 * step * dist(&p)).sqrt();
        prop_assert!((g[0] - p[0]).abs() <= tol && (g[1] - p[1]).abs() <= tol, "{:?} vs {:?}", g, p);
        prop_assert!((g[0] + g[1] - p[0] - p[1]).abs() <= 2.0 * step);
    }
}

#[test]
fn winner_determination_matches_enumeration() {
    common::check_winner_determination(300, 11).unwrap();
}

#[test]
fn vcg_nearest_is_in_the_core_and_matches_oracle() {
    common::check_vcg_nearest_core(40, 12, 1e-6).unwrap();
}

#[test]
fn embedded_llg_instances_agree() {
    common::check_embedded_llg(200, 13, 1e-9).unwrap();
}

#[test]
fn llllgg_has_expected_assignment_count() {
    // Brute count of pairwise-disjoint choices.
    let d = Domain::llllgg();
    let mut count = 0;
    for code in 0..729u32 {
        let mut rest = code;
        let mut taken = bne_core::Bundle::EMPTY;
        let mut ok = true;
        for i in (0..6).rev() {
            let c = rest % 3;
            rest /= 3;
            if c > 0 {
                let a = d.bidders[i].action_atoms[c as usize - 1];
                ok &= !a.intersects(taken);
                taken = taken.union(a);
            }
        }
        count += ok as usize;
    }
    assert_eq!(common::feasible_assignments(), count);
}
