use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bne_core::config::{parse_pairs, RunConfig};
use bne_core::mechanisms::{LlgRule, MechanismKey};
use bne_core::oracles::{l_infinity_distance, read_formula_file, AnalyticStrategy};
use bne_core::pipeline::{game_for, solve_with, RunStatus};
use bne_core::sampling::{build_game, Integrator};
use bne_core::strategies::{read_profile, ProfileDocument};
use bne_core::strategies::Profile;
use bne_core::verification::{sweep as run_sweep, verify, VerificationSettings};
use bne_core::DomainKind;

use crate::artifacts::{self, EpsilonFile, SearchSummary};
use crate::ConfigArgs;

fn exit_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::VerifiedBelowTarget => 0,
        RunStatus::VerifiedAboveTarget => 2,
        RunStatus::NonConverged => 3,
    }
}

/// Resolves the config: `base` pairs, then the file, then shorthands, then `--set`.
fn resolve(args: &ConfigArgs, base: Vec<(String, String)>) -> Result<RunConfig> {
    let mut pairs = base;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        pairs.extend(parse_pairs(&text)?.into_iter().map(|(k, v)| (k.to_string(), v.to_string())));
    }
    let shorthands = [
        ("domain", &args.domain),
        ("mechanism", &args.mechanism),
        ("llg.alpha", &args.alpha),
        ("llg.gamma", &args.gamma),
        ("seed", &args.seed),
        ("target_epsilon", &args.target_epsilon),
        ("workers", &args.workers),
    ];
    for (k, v) in shorthands {
        if let Some(v) = v {
            pairs.push((k.to_string(), v.clone()));
        }
    }
    for s in &args.set {
        let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{s}`"))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(RunConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?)
}

fn load_document(path: &Path) -> Result<ProfileDocument> {
    read_profile(path).with_context(|| format!("reading strategy file {}", path.display()))
}

/// Config for a stored profile: its setting first, user overrides after.
fn resolve_for_document(args: &ConfigArgs, doc: &ProfileDocument) -> Result<RunConfig> {
    let cfg = resolve(args, RunConfig::setting_pairs(doc.domain, doc.mechanism))?;
    if cfg.domain != doc.domain || cfg.mechanism != doc.mechanism {
        bail!("config setting {} does not match the strategy file's {}", cfg.mechanism, doc.mechanism);
    }
    Ok(cfg)
}

fn print_report(report: &bne_core::verification::EpsilonReport) {
    println!("method          {:?}", report.method);
    println!("epsilon         {:.6e}", report.epsilon);
    if let Some(b) = report.theorem_bound {
        println!("theorem bound   {b:.6e}");
    }
    println!("grid estimate   {:.6e}", report.grid_estimate);
    println!("verify seconds  {:.1}", report.wall_seconds);
}

pub fn solve(args: &ConfigArgs, out: &Path) -> Result<u8> {
    let cfg = resolve(args, Vec::new())?;
    let game = game_for(&cfg)?;
    let dir = artifacts::create_run_dir(out, &cfg)?;
    let result = solve_with(game.as_ref(), &cfg, Profile::truthful(game.domain().bidder_count()))?;
    artifacts::write_strategy(&dir, game.domain(), &cfg, &result.verification.profile)?;
    artifacts::write_trace(&dir, &result.search.trace)?;
    artifacts::write_epsilon(
        &dir,
        &EpsilonFile {
            status: result.status,
            target_epsilon: cfg.target_epsilon,
            report: &result.verification.report,
            search: Some(SearchSummary::new(&result.search, result.search_seconds)),
        },
    )?;
    println!("run             {}", dir.display());
    println!("status          {:?}", result.status);
    println!(
        "search          {} inner, {} outer, {:.1} s",
        result.search.inner_iterations, result.search.outer_passes, result.search_seconds
    );
    print_report(&result.verification.report);
    Ok(exit_code(result.status))
}

pub fn verify_only(args: &ConfigArgs, strategy: Option<&Path>, truthful: bool, out: &Path) -> Result<u8> {
    let (cfg, game, profile) = match (strategy, truthful) {
        (Some(path), false) => {
            let doc = load_document(path)?;
            let cfg = resolve_for_document(args, &doc)?;
            let game = game_for(&cfg)?;
            let profile = doc.to_profile(game.domain())?;
            (cfg, game, profile)
        }
        (None, true) => {
            let cfg = resolve(args, Vec::new())?;
            let game = game_for(&cfg)?;
            let profile = Profile::truthful(game.domain().bidder_count());
            (cfg, game, profile)
        }
        _ => bail!("pass exactly one of --strategy and --truthful"),
    };
    let dir = artifacts::create_run_dir(out, &cfg)?;
    let v = verify(game.as_ref(), &profile, &VerificationSettings::from_config(&cfg))?;
    let status = if v.report.epsilon <= cfg.target_epsilon {
        RunStatus::VerifiedBelowTarget
    } else {
        RunStatus::VerifiedAboveTarget
    };
    artifacts::write_strategy(&dir, game.domain(), &cfg, &v.profile)?;
    artifacts::write_epsilon(
        &dir,
        &EpsilonFile { status, target_epsilon: cfg.target_epsilon, report: &v.report, search: None },
    )?;
    println!("run             {}", dir.display());
    println!("status          {status:?}");
    print_report(&v.report);
    Ok(exit_code(status))
}

fn oracle_for(doc: &ProfileDocument, oracle: Option<&str>, formula: Option<&Path>) -> Result<AnalyticStrategy> {
    let (DomainKind::Llg { alpha, gamma }, MechanismKey::Llg(rule)) = (doc.domain, doc.mechanism) else {
        bail!("closed-form comparisons need an LLG strategy file");
    };
    match (oracle, formula) {
        (Some("llg.nearest_bid"), None) => {
            if rule != LlgRule::NearestBid || alpha != 2.0 {
                bail!("oracle llg.nearest_bid covers the nearest-bid rule with alpha = 2, not {} alpha = {alpha}", rule.name());
            }
            Ok(AnalyticStrategy::nearest_bid(gamma)?)
        }
        (Some(other), None) => bail!("unknown oracle `{other}`; built-in: llg.nearest_bid"),
        (None, Some(path)) => read_formula_file(path)?
            .into_iter()
            .find(|s| s.rule == rule && s.alpha == alpha && s.gamma == gamma)
            .ok_or_else(|| anyhow!("{} has no section for {} alpha={alpha} gamma={gamma}", path.display(), rule.name())),
        _ => bail!("pass exactly one of --oracle and --formula"),
    }
}

pub fn compare(
    strategy: &Path,
    oracle: Option<&str>,
    formula: Option<&Path>,
    probes: usize,
    csv_path: Option<&Path>,
) -> Result<u8> {
    let doc = load_document(strategy)?;
    let oracle = oracle_for(&doc, oracle, formula)?;
    let game = build_game(doc.domain, doc.mechanism, Integrator::Mc, 1)?;
    let profile = doc.to_profile(game.domain())?;
    let local = profile.get(0);
    let distance = l_infinity_distance(local, &oracle, probes)?;
    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["v", "bid", "oracle", "abs_diff"])?;
        for k in 0..probes {
            let v = if k + 1 == probes { 1.0 } else { k as f64 / (probes - 1) as f64 };
            let b = local.bid(&[v])?.0[0];
            let o = oracle.bid(v)?;
            w.write_record([v, b, o, (b - o).abs()].map(|x| x.to_string()))?;
        }
        w.flush()?;
    }
    println!("oracle          {}", oracle.source);
    println!("probes          {probes}");
    println!("l_infinity      {distance:.6e}");
    Ok(0)
}

pub fn sweep(args: &ConfigArgs, strategy: Option<&Path>, min_exp: u32, max_exp: u32, csv_path: Option<&Path>) -> Result<u8> {
    if min_exp < 1 || min_exp > max_exp || max_exp > 24 {
        bail!("need 1 <= min-exp <= max-exp <= 24");
    }
    let (cfg, game, profile) = match strategy {
        Some(path) => {
            let doc = load_document(path)?;
            let cfg = resolve_for_document(args, &doc)?;
            let game = game_for(&cfg)?;
            let profile = doc.to_profile(game.domain())?;
            (cfg, game, profile)
        }
        None => {
            let cfg = resolve(args, Vec::new())?;
            let game = game_for(&cfg)?;
            let n = game.domain().bidder_count();
            let solved = bne_core::search::run_search(game.as_ref(), &cfg, Profile::truthful(n))?;
            (cfg, game, solved.profile)
        }
    };
    let sizes: Vec<usize> = (min_exp..=max_exp).map(|e| 1usize << e).collect();
    let rows = run_sweep(game.as_ref(), &profile, &VerificationSettings::from_config(&cfg), &sizes)?;
    let mut w = match csv_path {
        Some(p) => Some(csv::Writer::from_path(p).with_context(|| format!("writing {}", p.display()))?),
        None => None,
    };
    println!("{:>8} {:>14} {:>14}", "points", "bound", "estimate");
    for r in &rows {
        let bound = r.theorem_bound.map_or("-".to_string(), |b| format!("{b:.6e}"));
        println!("{:>8} {bound:>14} {:>14.6e}", r.grid_points, r.grid_estimate);
        if let Some(w) = w.as_mut() {
            w.serialize(r)?;
        }
    }
    if let Some(mut w) = w {
        w.flush()?;
    }
    Ok(0)
}
