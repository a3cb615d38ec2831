//! Checks shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use bne_core::domains::Domain;
use bne_core::mechanisms::{
    build_mechanism, core_constraints, llg_payments, llg_allocate, CoalitionValueCache, LlllggStructure,
};
use bne_core::oracles::{brute_core_projection, brute_winner_determination};
use bne_core::sampling::{build_game, derive_key, Integrator, RngKind, SampleStream};
use bne_core::{Bid, LlgRule, LlllggRule, MechanismKey, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn random_llllgg_bids(rng: &mut ChaCha8Rng) -> Vec<Bid> {
    (0..6)
        .map(|i| {
            let hi = if i < 4 { 1.0 } else { 2.0 };
            // Some zero bids exercise ties and non-participation.
            let mut b = || if rng.gen_bool(0.1) { 0.0 } else { rng.gen::<f64>() * hi };
            Bid(vec![b(), b()])
        })
        .collect()
}

/// Winner determination against nested enumeration, exact equality.
pub fn check_winner_determination(profiles: usize, seed: u64) -> Check {
    let domain = Domain::llllgg();
    let mech = build_mechanism(MechanismKey::Llllgg(LlllggRule::FirstPrice));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..profiles {
        let bids = random_llllgg_bids(&mut rng);
        let fast = mech.run(&bids).map_err(|e| e.to_string())?.allocation;
        let (_, brute) = brute_winner_determination(&domain, &bids, 63);
        if fast != brute {
            return Err(format!("profile {k}: {fast:?} vs {brute:?}"));
        }
    }
    Ok(format!("{profiles} profiles identical"))
}

fn bid_array(bids: &[Bid]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for (o, b) in out.iter_mut().zip(bids) {
        *o = [b.0[0], b.0[1]];
    }
    out
}

/// VCG-nearest payments: every coalition core constraint holds, and the
/// payments match exhaustive min-revenue + projection within `tol`.
pub fn check_vcg_nearest_core(profiles: usize, seed: u64, tol: f64) -> Check {
    let domain = Domain::llllgg();
    let mech = build_mechanism(MechanismKey::Llllgg(LlllggRule::VcgNearest));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..profiles {
        let bids = random_llllgg_bids(&mut rng);
        let out = mech.run(&bids).map_err(|e| format!("profile {k}: {e}"))?;
        let alloc = &out.allocation;
        let won = |i: usize| {
            let a = alloc.assignments[i];
            domain.bidders[i].action_atoms.iter().position(|&x| x == a && !a.is_empty()).map(|j| bids[i].0[j])
        };
        // Coalition C blocks unless revenue + Σ_{i∈C} surplus_i ≥ W(C).
        let revenue: f64 = out.payments.iter().sum();
        for c in 1u64..64 {
            let (wc, _) = brute_winner_determination(&domain, &bids, c);
            let surplus: f64 = (0..6).filter(|&i| c >> i & 1 == 1).map(|i| won(i).map_or(0.0, |b| b - out.payments[i])).sum();
            if revenue + surplus < wc - 1e-9 {
                return Err(format!("profile {k}: coalition {c:#08b} blocks by {}", wc - revenue - surplus));
            }
        }
        let winners: Vec<usize> = alloc.winners().collect();
        let winning: Vec<f64> = winners.iter().map(|&i| won(i).unwrap()).collect();
        let cache = CoalitionValueCache::new(&bid_array(&bids));
        let cons = core_constraints(6, &winners, &winning, |c| cache.get(c));
        let mut target = vec![0.0; winners.len()];
        for c in cons.iter().filter(|c| c.members.count_ones() == 1) {
            target[c.members.trailing_zeros() as usize] = c.rhs.max(0.0);
        }
        let brute = brute_core_projection(&winning, &cons, &target).map_err(|e| format!("profile {k}: {e}"))?;
        for (pos, &i) in winners.iter().enumerate() {
            worst = worst.max((brute[pos] - out.payments[i]).abs());
        }
        if worst > tol {
            return Err(format!("profile {k}: payments differ from the oracle by {worst:.3e}"));
        }
    }
    Ok(format!("{profiles} profiles, 63 coalitions each, max oracle gap {worst:.2e}"))
}

/// LLLLGG restricted to two locals and one global on an LLG-shaped overlap
/// pays exactly like LLG.
pub fn check_embedded_llg(profiles: usize, seed: u64, tol: f64) -> Check {
    let mech = build_mechanism(MechanismKey::Llllgg(LlllggRule::VcgNearest));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..profiles {
        let (b1, b2, b3) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>() * 2.0);
        // L1 on AB, L2 on CD, G1 on ABCD; everyone else bids zero.
        let mut bids = vec![Bid(vec![0.0, 0.0]); 6];
        bids[0].0[0] = b1;
        bids[1].0[0] = b2;
        bids[4].0[0] = b3;
        let out = mech.run(&bids).map_err(|e| e.to_string())?;
        let llg = llg_payments(LlgRule::VcgNearest, [b1, b2, b3], &llg_allocate(b1, b2, b3)).map_err(|e| e.to_string())?;
        for (fast, want) in [(out.payments[0], llg[0]), (out.payments[1], llg[1]), (out.payments[4], llg[2])] {
            worst = worst.max((fast - want).abs());
        }
    }
    if worst <= tol {
        Ok(format!("{profiles} embedded instances, max gap {worst:.2e}"))
    } else {
        Err(format!("max gap {worst:.3e} > {tol:e}"))
    }
}

/// Mean and standard error of per-draw utilities over `chunks` pseudo-random
/// streams of `n` draws each.
pub fn chunked_estimate(integrator: Integrator, rule: LlgRule, chunks: usize, n: usize, bid: f64, v: f64) -> (f64, f64) {
    let game = build_game(bne_core::DomainKind::Llg { alpha: 1.0, gamma: 0.0 }, MechanismKey::Llg(rule), integrator, 1)
        .unwrap();
    let profile = Profile::truthful(3);
    let (mut sum, mut sq, mut count) = (0.0, 0.0, 0.0);
    for c in 0..chunks {
        let stream = SampleStream::keyed(RngKind::Pseudo, 3, derive_key(99 + integrator as u64, &[c as u64])).unwrap();
        let table = game.sample_table(0, &[v], &profile, &stream, n).unwrap();
        for x in table.sample_utilities(&[bid], &[v]).unwrap() {
            sum += x;
            sq += x * x;
            count += 1.0;
        }
    }
    let mean = sum / count;
    let var = (sq / count - mean * mean).max(0.0);
    (mean, (var / count).sqrt())
}

/// Importance sampling agrees with plain Monte Carlo within four combined
/// standard errors at `chunks × n` draws each.
pub fn check_importance_unbiased(chunks: usize, n: usize) -> Check {
    let mut lines = Vec::new();
    for (rule, bid, v) in [(LlgRule::Proxy, 0.4, 0.7), (LlgRule::VcgNearest, 0.8, 0.9), (LlgRule::NearestBid, 0.2, 0.3)] {
        let (m_is, se_is) = chunked_estimate(Integrator::McImportance, rule, chunks, n, bid, v);
        let (m_mc, se_mc) = chunked_estimate(Integrator::Mc, rule, chunks, n, bid, v);
        let z = (m_is - m_mc).abs() / (se_is * se_is + se_mc * se_mc).sqrt();
        if !(z <= 4.0) {
            return Err(format!("{}: IS {m_is:.6} vs MC {m_mc:.6}, z = {z:.2}", rule.name()));
        }
        lines.push(format!("{} z={z:.2}", rule.name()));
    }
    Ok(lines.join(", "))
}

/// Structure sanity used by several checks.
pub fn feasible_assignments() -> usize {
    LlllggStructure::get().feasible.len()
}

/// The decomposition at one own value predicts the estimate at another on the
/// same independent-value table.
pub fn check_extrapolation(tol: f64) -> Check {
    let mut worst: f64 = 0.0;
    for rule in [LlgRule::Proxy, LlgRule::NearestBid, LlgRule::FirstPrice] {
        let integrator = if rule == LlgRule::FirstPrice { Integrator::Mc } else { Integrator::McImportance };
        let game = build_game(bne_core::DomainKind::Llg { alpha: 2.0, gamma: 0.0 }, MechanismKey::Llg(rule), integrator, 1)
            .unwrap();
        let stream = SampleStream::keyed(RngKind::Sobol, 3, derive_key(31, &[rule as u64])).unwrap();
        let profile = Profile::truthful(3);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let (w, w2, b): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
            let d = game.sample_table(0, &[w], &profile, &stream, 2048).unwrap().evaluate(&[b]).unwrap();
            let direct = game.sample_table(0, &[w2], &profile, &stream, 2048).unwrap().evaluate(&[b]).unwrap();
            worst = worst.max((d.utility(&[w2]) - direct.utility(&[w2])).abs());
        }
    }
    if worst <= tol {
        Ok(format!("max gap {worst:.1e}"))
    } else {
        Err(format!("max gap {worst:.3e} > {tol:e}"))
    }
}

fn constant_profile(c: f64) -> Profile {
    use bne_core::{ControlGrid, InterpolatedStrategy, InterpolationMode, Strategy};
    let grid = ControlGrid::uniform(&[0.0], &[1.0], 2).unwrap();
    let s = InterpolatedStrategy::new(grid, 1, vec![c, c], InterpolationMode::Multilinear).unwrap();
    Profile::new(vec![std::sync::Arc::new(Strategy::Interpolated(s))])
}

pub fn synthetic_settings(points: usize) -> bne_core::VerificationSettings {
    bne_core::VerificationSettings {
        grid_points: points,
        samples: 1,
        rng: RngKind::Sobol,
        seed: 2,
        pattern: bne_core::search::PatternSearchConfig::with_budget(0.1, 20),
        optimizer: bne_core::config::Optimizer::Brent,
        bid_ceiling_factor: 2.0,
        method: bne_core::config::VerificationMethod::Auto,
        include_fixed_truthful: false,
        workers: 1,
    }
}

/// Bound on the closed-form synthetic setting: tight for the constant-0.25
/// strategy on the two-point grid and never below the true loss.
pub fn check_synthetic_bound(trials: usize) -> Check {
    use bne_core::oracles::{synthetic_best_response_utility, synthetic_utility, SyntheticFirstPrice, SyntheticIntegration};
    use bne_core::verification::verify;
    let game = SyntheticFirstPrice::new(SyntheticIntegration::ClosedForm);
    let tight = verify(&game, &constant_profile(0.25), &synthetic_settings(2)).map_err(|e| e.to_string())?.report;
    let bound = tight.theorem_bound.ok_or("no bound")?;
    if (bound - 0.0625).abs() > 1e-12 {
        return Err(format!("constant 0.25 bound {bound} != 0.0625"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..trials {
        let c: f64 = rng.gen();
        let points = rng.gen_range(2..16);
        let r = verify(&game, &constant_profile(c), &synthetic_settings(points)).map_err(|e| e.to_string())?.report;
        let truth = (0..=4000)
            .map(|k| {
                let v = k as f64 / 4000.0;
                synthetic_best_response_utility(v) - synthetic_utility(v, c)
            })
            .fold(0.0, f64::max);
        let b = r.theorem_bound.ok_or("no bound")?;
        if b < truth - 1e-12 || b < r.grid_estimate {
            return Err(format!("c {c} with {points} points: bound {b} vs true {truth}, estimate {}", r.grid_estimate));
        }
    }
    Ok(format!("bound 0.0625 at endpoints, sound on {trials} strategies"))
}

/// Returned utility never falls below the incumbent's on the same table.
pub fn check_pattern_non_degradation(trials: usize) -> Check {
    use bne_core::search::{pattern_search, PatternSearchConfig};
    let game = build_game(bne_core::DomainKind::Llg { alpha: 1.0, gamma: 0.5 }, MechanismKey::Llg(LlgRule::Proxy), Integrator::McImportance, 1)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for k in 0..trials {
        let (v, start): (f64, f64) = (rng.gen(), rng.gen_range(0.0..2.0));
        let budget = rng.gen_range(1..16);
        let stream = SampleStream::keyed(RngKind::Sobol, 3, derive_key(52, &[k as u64])).unwrap();
        let table = game.sample_table(0, &[v], &Profile::truthful(3), &stream, 500).unwrap();
        let incumbent = table.evaluate(&[start]).unwrap().utility(&[v]);
        let r = pattern_search(&[start], &[2.0], &PatternSearchConfig::with_budget(0.1, budget), |b| {
            Ok((table.evaluate(b)?.utility(&[v]), ()))
        })
        .map_err(|e| e.to_string())?;
        if r.utility < incumbent {
            return Err(format!("v {v} start {start}: {} < {incumbent}", r.utility));
        }
    }
    Ok(format!("{trials} searches"))
}

pub fn check_dampening(trials: usize) -> Check {
    use bne_core::search::dampening_weight;
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..trials {
        let c = rng.gen_range(1.0..1e4);
        let mut losses: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() * 0.01).collect();
        losses.sort_by(f64::total_cmp);
        let w: Vec<f64> = losses.iter().map(|&l| dampening_weight(l, 0.2, 0.7, c)).collect();
        if w.iter().any(|x| !(0.2..=0.7).contains(x)) || w.windows(2).any(|p| p[0] > p[1]) {
            return Err(format!("c {c}: weights {w:?}"));
        }
    }
    Ok(format!("{trials} loss ladders in range and monotone"))
}

/// Each coordinate of the first `2^k` points of every keyed Sobol stream
/// hits each dyadic interval of width `2^-k` exactly once.
pub fn check_sobol_stratification(max_k: u32) -> Check {
    for key in 0..8u64 {
        let dim = bne_core::sampling::MAX_DIMENSION;
        let stream = SampleStream::keyed(RngKind::Sobol, dim, derive_key(71, &[key])).unwrap();
        for k in 0..=max_k {
            let n = 1usize << k;
            let pts = stream.generate(n).unwrap();
            for d in 0..dim {
                let mut seen = vec![false; n];
                for row in pts.chunks_exact(dim) {
                    let cell = (row[d] * n as f64) as usize;
                    if seen[cell] {
                        return Err(format!("key {key} k {k} dimension {d}"));
                    }
                    seen[cell] = true;
                }
            }
        }
    }
    Ok(format!("k <= {max_k}, 8 streams"))
}

/// Search and verification give bit-identical results across reruns and
/// worker counts.
pub fn check_determinism() -> Check {
    use bne_core::config::RunConfig;
    use bne_core::pipeline::solve;
    let mut cfg = RunConfig::llg(1.0, 0.5, LlgRule::Proxy);
    cfg.samples_search = 2_000;
    cfg.samples_verification = 4_000;
    cfg.grid_verification = 128;
    let fingerprint = |cfg: &RunConfig| -> Result<Vec<u64>, String> {
        let r = solve(cfg).map_err(|e| e.to_string())?;
        let mut bits = vec![r.verification.report.epsilon.to_bits(), r.search.epsilon_estimate.to_bits()];
        for b in 0..3 {
            if let bne_core::Strategy::Interpolated(s) = r.search.profile.get(b) {
                bits.extend(s.bids().iter().chain(&s.grid().axes()[0]).map(|x| x.to_bits()));
            }
        }
        Ok(bits)
    };
    let a = fingerprint(&cfg)?;
    let b = fingerprint(&cfg)?;
    cfg.workers = 4;
    let c = fingerprint(&cfg)?;
    if a == b && a == c {
        Ok(format!("{} values identical across reruns and 1 vs 4 workers", a.len()))
    } else {
        Err("results differ".into())
    }
}

/// Truthful bidding under VCG at default verification precision.
pub fn check_vcg_truthful(tol: f64) -> Check {
    use bne_core::config::RunConfig;
    let mut worst: f64 = 0.0;
    for (alpha, gamma) in [(1.0, 0.0), (2.0, 0.0)] {
        let cfg = RunConfig::llg(alpha, gamma, LlgRule::Vcg);
        let v = bne_core::pipeline::verify_only(&cfg, &Profile::truthful(3)).map_err(|e| e.to_string())?;
        worst = worst.max(v.report.epsilon);
    }
    if worst <= tol {
        Ok(format!("max epsilon {worst:.2e}"))
    } else {
        Err(format!("epsilon {worst:.3e} > {tol:e}"))
    }
}
