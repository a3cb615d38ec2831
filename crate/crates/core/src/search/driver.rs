//! The iterated best-response loop.
//!
//! Each iteration computes best responses for every strategy group against a
//! snapshot of the current profile and applies dampened updates. Cheap inner
//! iterations on adaptive grids run until the estimated epsilon falls below
//! `inner_gate · target`; an outer pass on a dense even grid with verification
//! precision then decides whether to stop or resume the inner loop.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ControlPointMode, DampeningMode, RunConfig};
use crate::domains::StrategyGroup;
use crate::error::{Error, Result};
use crate::sampling::{derive_key, AuctionGame};
use crate::search::adaptive::adaptive_best_response;
use crate::search::dampening::{update_strategy, DampeningConfig};
use crate::search::pattern::PatternSearchConfig;
use crate::search::point::BestResponder;
use crate::strategies::{ControlGrid, InterpolatedStrategy, InterpolationMode, Profile, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Inner,
    Outer,
}

impl Phase {
    fn code(self) -> u64 {
        match self {
            Phase::Inner => 0,
            Phase::Outer => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub phase: Phase,
    pub bidder: usize,
    pub epsilon: f64,
    pub control_points: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub profile: Profile,
    /// Estimated epsilon of the last iteration.
    pub epsilon_estimate: f64,
    pub converged: bool,
    pub inner_iterations: usize,
    pub outer_passes: usize,
    pub trace: Vec<TraceRow>,
}

fn dampening(cfg: &RunConfig) -> DampeningConfig {
    match cfg.dampening {
        DampeningMode::Adaptive => DampeningConfig::Adaptive {
            w_min: cfg.dampening_wmin,
            w_max: cfg.dampening_wmax,
            c: cfg.dampening_steepness(),
        },
        DampeningMode::Fixed => DampeningConfig::Fixed { w: cfg.dampening_fixed },
    }
}

/// Runs the search from `initial` until the outer pass meets the target or an
/// iteration cap is hit.
pub fn run_search(game: &dyn AuctionGame, cfg: &RunConfig, initial: Profile) -> Result<SearchOutcome> {
    cfg.validate()?;
    let domain = game.domain();
    initial.check(domain)?;
    if cfg.control_points == ControlPointMode::Adaptive
        && domain.groups().iter().any(|g| domain.value_dim(g.representative()) != 1)
    {
        return Err(Error::Config("adaptive control points need one-dimensional valuations".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let mut out = SearchOutcome {
        profile: initial,
        epsilon_estimate: f64::INFINITY,
        converged: false,
        inner_iterations: 0,
        outer_passes: 0,
        trace: Vec::new(),
    };
    let mut pass = 0usize;
    let mut required = 0usize;
    loop {
        let mut streak = 0usize;
        loop {
            if out.inner_iterations >= cfg.max_inner_iterations {
                return Ok(out);
            }
            let eps = pool.install(|| iterate(game, cfg, Phase::Inner, pass, &mut out, started))?;
            pass += 1;
            out.inner_iterations += 1;
            streak += 1;
            if eps <= cfg.inner_gate * cfg.target_epsilon && streak >= required {
                break;
            }
        }
        let eps = pool.install(|| iterate(game, cfg, Phase::Outer, pass, &mut out, started))?;
        pass += 1;
        out.outer_passes += 1;
        if eps <= cfg.target_epsilon {
            out.converged = true;
            return Ok(out);
        }
        if out.outer_passes >= cfg.max_outer_passes {
            return Ok(out);
        }
        required = cfg.resume_iterations;
    }
}

/// One best-response sweep over all groups; returns the estimated epsilon.
fn iterate(
    game: &dyn AuctionGame,
    cfg: &RunConfig,
    phase: Phase,
    pass: usize,
    out: &mut SearchOutcome,
    started: Instant,
) -> Result<f64> {
    let snapshot = out.profile.clone();
    let (samples, budget) = match phase {
        Phase::Inner => (cfg.samples_search, cfg.pattern_budget_search),
        Phase::Outer => (cfg.samples_verification, cfg.pattern_budget_verification),
    };
    let responder = BestResponder {
        game,
        profile: &snapshot,
        samples,
        rng: cfg.rng,
        optimizer: cfg.optimizer,
        pattern: PatternSearchConfig::with_budget(cfg.pattern_spacing, budget),
        bid_ceiling_factor: cfg.bid_ceiling_factor,
        crn: cfg.crn,
    };
    let damp = dampening(cfg);
    let mut epsilon = 0.0f64;
    for group in game.domain().groups() {
        let (br, losses) = group_best_response(&responder, cfg, phase, pass, &group)?;
        let rep = group.representative();
        let updated = update_strategy(snapshot.get(rep), &br, &losses, &damp)?;
        let eps = losses.iter().copied().fold(0.0, f64::max);
        epsilon = epsilon.max(eps);
        out.profile.set_group(&group.members, Arc::new(Strategy::Interpolated(updated)));
        out.trace.push(TraceRow {
            iteration: pass,
            phase,
            bidder: rep,
            epsilon: eps,
            control_points: losses.len(),
            wall_seconds: started.elapsed().as_secs_f64(),
        });
    }
    out.epsilon_estimate = epsilon;
    Ok(epsilon)
}

/// Best-response strategy of the group's representative and the incumbent's
/// loss at every control point.
fn group_best_response(
    responder: &BestResponder<'_>,
    cfg: &RunConfig,
    phase: Phase,
    pass: usize,
    group: &StrategyGroup,
) -> Result<(InterpolatedStrategy, Vec<f64>)> {
    let domain = responder.game.domain();
    let bidder = group.representative();
    let atoms = domain.atom_count(bidder);
    let dim = domain.value_dim(bidder);
    let hi = domain.atom_value_max(bidder);
    let incumbent = responder.profile.get(bidder);
    let key = |index: usize| derive_key(cfg.seed, &[phase.code(), pass as u64, bidder as u64, index as u64]);
    let at = |index: usize, v: &[f64]| -> Result<(Vec<f64>, f64)> {
        let start = incumbent.bid(v)?;
        let r = responder.best_response(bidder, v, &start.0, key(index))?;
        Ok((r.bid, r.loss))
    };

    if phase == Phase::Inner && cfg.control_points == ControlPointMode::Adaptive {
        let min_interval = if cfg.grid_min_interval > 0.0 {
            cfg.grid_min_interval
        } else {
            hi / (4.0 * cfg.grid_inner as f64)
        };
        let points = adaptive_best_response(0.0, hi, cfg.grid_initial, cfg.grid_inner, min_interval, |batch| {
            batch.par_iter().map(|&(index, v)| at(index, &[v])).collect()
        })?;
        let grid = ControlGrid::new(vec![points.iter().map(|p| p.v).collect()])?;
        let losses = points.iter().map(|p| p.loss).collect();
        let bids = points.into_iter().flat_map(|p| p.bid).collect();
        return Ok((InterpolatedStrategy::new(grid, atoms, bids, InterpolationMode::Multilinear)?, losses));
    }

    let count = match phase {
        Phase::Inner => cfg.grid_inner,
        Phase::Outer => cfg.grid_outer,
    };
    let grid = ControlGrid::uniform(&vec![0.0; dim], &vec![hi; dim], count)?;
    let results: Vec<(Vec<f64>, f64)> =
        (0..grid.len()).into_par_iter().map(|k| at(k, &grid.point(k))).collect::<Result<_>>()?;
    let losses = results.iter().map(|r| r.1).collect();
    let bids = results.into_iter().flat_map(|r| r.0).collect();
    Ok((InterpolatedStrategy::new(grid, atoms, bids, InterpolationMode::Multilinear)?, losses))
}
