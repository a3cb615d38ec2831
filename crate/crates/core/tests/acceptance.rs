//! Acceptance run: one pass/fail line per criterion.
//!
//! `ACCEPTANCE=1,3,8` selects criteria. Failures are reported but only turn
//! into a failing exit status with `ACCEPTANCE_STRICT=1`.

mod common;

use std::collections::HashMap;
use std::time::Instant;

use bne_core::config::RunConfig;
use bne_core::oracles::{l_infinity_distance, AnalyticStrategy};
use bne_core::pipeline::{game_for, solve};
use bne_core::search::run_search;
use bne_core::verification::{sweep, verify};
use bne_core::{LlgRule, LlllggRule, MechanismKey, Profile, RunStatus, SolveResult, VerificationSettings};
use common::Check;

const RULES: [LlgRule; 4] = [LlgRule::VcgNearest, LlgRule::NearestBid, LlgRule::Proxy, LlgRule::Proportional];
const ALPHAS: [f64; 2] = [1.0, 2.0];
const GAMMAS: [f64; 2] = [0.0, 0.5];

/// Ten times the reference median runtime of a full LLG solve.
const LLG_RUNTIME_LIMIT: f64 = 1071.0;
const LLLLGG_RUNTIME_LIMIT: f64 = 8.0 * 3600.0;

type Key = (LlgRule, u64, u64);

/// Default-configuration solves shared between criteria.
#[derive(Default)]
struct Solves {
    llg: HashMap<Key, (RunConfig, SolveResult)>,
}

impl Solves {
    fn get(&mut self, rule: LlgRule, alpha: f64, gamma: f64) -> Result<&(RunConfig, SolveResult), String> {
        let key = (rule, alpha.to_bits(), gamma.to_bits());
        if let std::collections::hash_map::Entry::Vacant(slot) = self.llg.entry(key) {
            let cfg = RunConfig::llg(alpha, gamma, rule);
            let r = solve(&cfg).map_err(|e| e.to_string())?;
            eprintln!(
                "  solved {} alpha={alpha} gamma={gamma}: {:?}, epsilon {:.3e}, {:.1} s",
                rule.name(),
                r.status,
                r.verification.report.epsilon,
                r.total_seconds
            );
            slot.insert((cfg, r));
        }
        Ok(&self.llg[&key])
    }
}

fn settings() -> impl Iterator<Item = (LlgRule, f64, f64)> {
    RULES.into_iter().flat_map(|r| ALPHAS.into_iter().flat_map(move |a| GAMMAS.into_iter().map(move |g| (r, a, g))))
}

fn end_to_end(solves: &mut Solves) -> Check {
    let (mut below, mut worst_eps, mut slowest) = (0, 0.0f64, 0.0f64);
    let mut problems = Vec::new();
    for (rule, alpha, gamma) in settings() {
        let (_, r) = solves.get(rule, alpha, gamma)?;
        worst_eps = worst_eps.max(r.verification.report.epsilon);
        slowest = slowest.max(r.total_seconds);
        if r.status == RunStatus::VerifiedBelowTarget {
            below += 1;
        } else {
            problems.push(format!("{} a={alpha} g={gamma} {:?}", rule.name(), r.status));
        }
        if r.total_seconds > LLG_RUNTIME_LIMIT {
            problems.push(format!("{} a={alpha} g={gamma} took {:.0} s", rule.name(), r.total_seconds));
        }
    }
    let detail = format!("{below}/16 verified below target, max epsilon {worst_eps:.2e}, slowest {slowest:.0} s");
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join(", ")))
    }
}

fn analytic_agreement(solves: &mut Solves) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for gamma in GAMMAS {
        let (_, r) = solves.get(LlgRule::NearestBid, 2.0, gamma)?;
        let oracle = AnalyticStrategy::nearest_bid(gamma).map_err(|e| e.to_string())?;
        let d = l_infinity_distance(r.search.profile.get(0), &oracle, 10_001).map_err(|e| e.to_string())?;
        ok &= d <= 0.005;
        parts.push(format!("gamma={gamma}: {d:.2e}"));
    }
    let detail = format!("L-infinity {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(format!("{detail} (limit 5e-3)"))
    }
}

fn bound_vs_estimate(solves: &mut Solves) -> Check {
    let sizes: Vec<usize> = (1..=13).map(|k| 1usize << k).collect();
    let mut worst_gap = 0.0f64;
    for (rule, alpha, gamma) in settings().filter(|s| s.2 == 0.0) {
        let (cfg, r) = solves.get(rule, alpha, gamma)?;
        let game = game_for(cfg).map_err(|e| e.to_string())?;
        let rows = sweep(game.as_ref(), &r.search.profile, &VerificationSettings::from_config(cfg), &sizes)
            .map_err(|e| e.to_string())?;
        let name = format!("{} a={alpha}", rule.name());
        let mut previous = f64::INFINITY;
        for row in &rows {
            let bound = row.theorem_bound.ok_or(format!("{name}: no bound"))?;
            if bound < row.grid_estimate {
                return Err(format!("{name} at {} points: bound {bound:e} < estimate {:e}", row.grid_points, row.grid_estimate));
            }
            if bound > previous {
                return Err(format!("{name}: bound rises to {bound:e} at {} points (was {previous:e})", row.grid_points));
            }
            previous = bound;
        }
        let last = rows.last().unwrap();
        let gap = last.theorem_bound.unwrap() - last.grid_estimate;
        worst_gap = worst_gap.max(gap);
        eprintln!("  sweep {name}: bound {:.3e} -> {:.3e}, terminal gap {gap:.1e}", rows[0].theorem_bound.unwrap(), previous);
        if gap > 1e-6 {
            return Err(format!("{name}: terminal gap {gap:e} > 1e-6"));
        }
    }
    Ok(format!("8 settings, bound >= estimate and non-increasing, max terminal gap {worst_gap:.1e}"))
}

fn std_dev(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn stability(solves: &mut Solves) -> Check {
    let (rule, alpha, gamma) = (LlgRule::NearestBid, 1.0, 0.0);
    let (base_cfg, base) = solves.get(rule, alpha, gamma)?;
    let (base_cfg, base_profile, base_eps) = (base_cfg.clone(), base.search.profile.clone(), base.verification.report.epsilon);
    let mut search_eps = vec![base_eps];
    for seed in 2..=10 {
        let mut cfg = base_cfg.clone();
        cfg.seed = seed;
        search_eps.push(solve(&cfg).map_err(|e| e.to_string())?.verification.report.epsilon);
    }
    let game = game_for(&base_cfg).map_err(|e| e.to_string())?;
    let mut verify_eps = Vec::new();
    for seed in 1..=10 {
        let mut cfg = base_cfg.clone();
        cfg.verification_seed = seed;
        let v = verify(game.as_ref(), &base_profile, &VerificationSettings::from_config(&cfg)).map_err(|e| e.to_string())?;
        verify_eps.push(v.report.epsilon);
    }
    let (a, b) = (std_dev(&search_eps), std_dev(&verify_eps));
    let detail = format!("{} a={alpha} g={gamma}: std over search seeds {a:.2e}, over verification seeds {b:.2e}", rule.name());
    if a <= 1e-5 && b <= 1e-5 {
        Ok(detail)
    } else {
        Err(format!("{detail} (limit 1e-5)"))
    }
}

fn llllgg_first_price() -> Check {
    let cfg = RunConfig::defaults(bne_core::DomainKind::Llllgg, MechanismKey::Llllgg(LlllggRule::FirstPrice))
        .map_err(|e| e.to_string())?;
    let r = solve(&cfg).map_err(|e| e.to_string())?;
    let core_hours = r.total_seconds * cfg.workers as f64 / 3600.0;
    let bound = r.verification.report.theorem_bound.ok_or("no theorem bound")?;
    let local = r.search.profile.get(0);
    let (mut sum, mut count) = (0.0, 0.0);
    for i in 0..=40 {
        for j in 0..=40 {
            let v = [0.75 + 0.25 * i as f64 / 40.0, 0.25 * j as f64 / 40.0];
            sum += local.bid(&v).map_err(|e| e.to_string())?.0[1];
            count += 1.0;
        }
    }
    let free_riding = sum / count;
    let detail = format!(
        "bound {bound:.4e}, mean low-bundle bid {free_riding:.3e}, {:.2} core-hours, status {:?}",
        core_hours, r.status
    );
    if bound <= 0.012 && free_riding <= 0.05 && r.total_seconds * cfg.workers as f64 <= LLLLGG_RUNTIME_LIMIT {
        Ok(detail)
    } else {
        Err(format!("{detail} (limits 0.012, 0.05, 8 core-hours)"))
    }
}

fn llllgg_properties() -> Check {
    let a = common::check_winner_determination(1000, 101)?;
    let b = common::check_vcg_nearest_core(200, 102, 1e-4)?;
    let c = common::check_embedded_llg(200, 103, 1e-9)?;
    Ok(format!("winner determination: {a}; vcg-nearest: {b}; embedded LLG: {c}"))
}

fn ablation_config(pairs: &[(&str, String)], seed: u64) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::llg(1.0, 0.5, LlgRule::Proxy);
    for (k, v) in pairs {
        cfg.set(k, v).map_err(|e| e.to_string())?;
    }
    cfg.seed = seed;
    Ok(cfg)
}

/// Converged seed count and mean inner iterations over seeds 1..=seeds,
/// stopping at the first non-converged seed when `stop_early`.
fn seed_runs(pairs: &[(&str, String)], seeds: u64, stop_early: bool) -> Result<(u64, f64), String> {
    let (mut converged, mut iterations) = (0, 0);
    for seed in 1..=seeds {
        let cfg = ablation_config(pairs, seed)?;
        let game = game_for(&cfg).map_err(|e| e.to_string())?;
        let out = run_search(game.as_ref(), &cfg, Profile::truthful(3)).map_err(|e| e.to_string())?;
        iterations += out.inner_iterations;
        if out.converged {
            converged += 1;
        } else if stop_early {
            return Ok((converged, f64::NAN));
        }
    }
    Ok((converged, iterations as f64 / seeds as f64))
}

fn smallest_converging(ladder: &[usize], pairs: impl Fn(usize) -> Vec<(&'static str, String)>) -> Result<Option<usize>, String> {
    for &n in ladder {
        if seed_runs(&pairs(n), 10, true)?.0 == 10 {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn ablation() -> Check {
    let fmt = |n: Option<usize>| n.map_or("none in ladder".to_string(), |n| n.to_string());
    let ladder = [125, 250, 500, 1000, 2000, 4000, 8000, 16000];
    let samples = |crn: bool| {
        move |n: usize| {
            vec![
                ("samples.search", n.to_string()),
                ("samples.verification", (2 * n).to_string()),
                ("max_inner_iterations", "30".to_string()),
                ("crn", crn.to_string()),
            ]
        }
    };
    let with_crn = smallest_converging(&ladder, samples(true))?;
    let without_crn = smallest_converging(&ladder, samples(false))?;
    let crn_ok = match (with_crn, without_crn) {
        (Some(a), Some(b)) => b > a,
        (Some(_), None) => true,
        _ => false,
    };

    let (adaptive_conv, adaptive_it) = seed_runs(&[("dampening", "adaptive".into())], 10, false)?;
    let (fixed_conv, fixed_it) = seed_runs(&[("dampening", "fixed".into()), ("dampening.fixed", "0.5".into())], 10, false)?;
    let damp_ok = adaptive_conv == 10 && fixed_conv == 10 && adaptive_it <= fixed_it;

    let (points_conv, _) = seed_runs(&[("control_points", "adaptive".into())], 10, false)?;
    let even = smallest_converging(&[5, 10, 20, 40, 80, 160], |n| {
        vec![
            ("control_points", "even".into()),
            ("grid.inner", n.to_string()),
            ("max_inner_iterations", "30".to_string()),
        ]
    })?;
    let points_ok = points_conv == 10 && even.is_none_or(|n| n > 40);

    let detail = format!(
        "(a) samples for 10/10: crn {} vs no crn {} [{}]; (b) mean iterations adaptive {adaptive_it:.2} vs fixed {fixed_it:.2} [{}]; \
         (c) adaptive 40 points {points_conv}/10, smallest even grid {} [{}]",
        fmt(with_crn),
        fmt(without_crn),
        if crn_ok { "ok" } else { "fail" },
        if damp_ok { "ok" } else { "fail" },
        fmt(even),
        if points_ok { "ok" } else { "fail" },
    );
    if crn_ok && damp_ok && points_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn property_suites() -> Check {
    let parts = [
        ("extrapolation", common::check_extrapolation(1e-12)),
        ("synthetic bound", common::check_synthetic_bound(100)),
        ("pattern search", common::check_pattern_non_degradation(200)),
        ("dampening", common::check_dampening(200)),
        ("sobol", common::check_sobol_stratification(10)),
        ("importance sampling", common::check_importance_unbiased(10, 1_000_000)),
        ("determinism", common::check_determinism()),
        ("truthful vcg", common::check_vcg_truthful(2e-4)),
    ];
    let mut lines = Vec::new();
    let mut failed = false;
    for (name, r) in parts {
        match r {
            Ok(s) => lines.push(format!("{name}: {s}")),
            Err(s) => {
                failed = true;
                lines.push(format!("{name} FAILED: {s}"));
            }
        }
    }
    if failed {
        Err(lines.join("; "))
    } else {
        Ok(lines.join("; "))
    }
}

fn main() {
    let selected: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut solves = Solves::default();
    type Run<'a> = Box<dyn FnOnce(&mut Solves) -> Check + 'a>;
    let criteria: Vec<(u32, &str, Run)> = vec![
        (1, "llg end-to-end convergence", Box::new(end_to_end)),
        (2, "analytical agreement", Box::new(analytic_agreement)),
        (3, "bound vs estimate sweep", Box::new(bound_vs_estimate)),
        (4, "run-to-run stability", Box::new(stability)),
        (5, "llllgg loose first price", Box::new(|_| llllgg_first_price())),
        (6, "llllgg mechanism properties", Box::new(|_| llllgg_properties())),
        (7, "search technique ablation", Box::new(|_| ablation())),
        (8, "property suites", Box::new(|_| property_suites())),
    ];
    let (mut passed, mut ran) = (0, 0);
    for (id, name, run) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        let started = Instant::now();
        let result = run(&mut solves);
        let secs = started.elapsed().as_secs_f64();
        ran += 1;
        match result {
            Ok(detail) => {
                passed += 1;
                println!("criterion {id} PASS {name}: {detail} ({secs:.0} s)");
            }
            Err(detail) => println!("criterion {id} FAIL {name}: {detail} ({secs:.0} s)"),
        }
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if strict && passed < ran {
        std::process::exit(1);
    }
}
