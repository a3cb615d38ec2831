//! Verification of a candidate profile.
//!
//! The candidate is first replaced by its piecewise-constant version `s*` on a
//! dense even grid, so that `s*` is what gets certified. For each checked
//! bidder a best response is computed at every grid point. With independent
//! valuations one set of opponent draws serves the whole grid, and the utility
//! of the bid played on a cell is linear in the bidder's atom values. That
//! gives an upper bound on the loss anywhere in the cell from its vertices
//! alone. The grid estimate only looks at the grid points themselves.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Optimizer, RunConfig, VerificationMethod};
use crate::error::{Error, Result};
use crate::model::Role;
use crate::sampling::{derive_key, AuctionGame, RngKind, SampleStream, SampleTable, UtilityDecomposition};
use crate::search::pattern::PatternSearchConfig;
use crate::search::point::BestResponder;
use crate::strategies::{convert_to_piecewise_constant, ControlGrid, Profile, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSettings {
    pub grid_points: usize,
    pub samples: usize,
    pub rng: RngKind,
    pub seed: u64,
    pub pattern: PatternSearchConfig,
    pub optimizer: Optimizer,
    pub bid_ceiling_factor: f64,
    pub method: VerificationMethod,
    pub include_fixed_truthful: bool,
    pub workers: usize,
}

impl VerificationSettings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        VerificationSettings {
            grid_points: cfg.grid_verification,
            samples: cfg.samples_verification,
            rng: cfg.rng,
            seed: cfg.verification_seed,
            pattern: PatternSearchConfig::with_budget(cfg.pattern_spacing, cfg.pattern_budget_verification),
            optimizer: cfg.optimizer,
            bid_ceiling_factor: cfg.bid_ceiling_factor,
            method: cfg.verification_method,
            include_fixed_truthful: cfg.verify_fixed_truthful,
            workers: cfg.workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidderReport {
    pub bidder: usize,
    pub theorem_bound: Option<f64>,
    pub grid_estimate: f64,
    /// Valuation where the bound is attained, and the lower corner of its cell.
    pub worst_bound_vertex: Option<Vec<f64>>,
    pub worst_bound_cell: Option<Vec<f64>>,
    pub worst_estimate_point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub method: VerificationMethod,
    /// The bound when computed, the estimate otherwise.
    pub epsilon: f64,
    pub theorem_bound: Option<f64>,
    pub grid_estimate: f64,
    pub bidders: Vec<BidderReport>,
    pub skipped_bidders: Vec<usize>,
    pub settings: VerificationSettings,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub report: EpsilonReport,
    /// The piecewise-constant profile that was verified.
    pub profile: Profile,
}

/// Even verification grid covering the value space of `bidder`.
pub fn verification_grid(game: &dyn AuctionGame, bidder: usize, points: usize) -> Result<ControlGrid> {
    let d = game.domain();
    let dim = d.value_dim(bidder);
    ControlGrid::uniform(&vec![0.0; dim], &vec![d.atom_value_max(bidder); dim], points)
}

/// Piecewise-constant version of `profile` on the verification grids.
pub fn piecewise_constant_profile(game: &dyn AuctionGame, profile: &Profile, points: usize) -> Result<Profile> {
    let d = game.domain();
    profile.check(d)?;
    let mut out = Vec::with_capacity(profile.len());
    for b in 0..profile.len() {
        out.push(match profile.get(b) {
            Strategy::Truthful => profile.arc(b).clone(),
            s => Arc::new(Strategy::Interpolated(convert_to_piecewise_constant(
                s,
                d.atom_count(b),
                &verification_grid(game, b, points)?,
            )?)),
        });
    }
    Ok(Profile::new(out))
}

pub fn verify(game: &dyn AuctionGame, profile: &Profile, settings: &VerificationSettings) -> Result<Verification> {
    let started = Instant::now();
    let domain = game.domain();
    let independent = domain.independent();
    let bound = match settings.method {
        VerificationMethod::Auto => independent,
        VerificationMethod::GridEstimate => false,
        VerificationMethod::TheoremBound if !independent => {
            return Err(Error::CorrelatedDomain(
                "the theorem bound needs independent valuations; use the grid estimate".into(),
            ))
        }
        VerificationMethod::TheoremBound => true,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let star = piecewise_constant_profile(game, profile, settings.grid_points)?;

    let mut bidders = Vec::new();
    let mut checked: Vec<usize> = domain.groups().iter().map(|g| g.representative()).collect();
    let mut skipped = Vec::new();
    for b in &domain.bidders {
        if b.role == Role::FixedTruthful {
            if settings.include_fixed_truthful {
                checked.push(b.id);
            } else {
                skipped.push(b.id);
            }
        }
    }
    checked.sort_unstable();
    for bidder in checked {
        bidders.push(pool.install(|| verify_bidder(game, &star, settings, bidder, bound, independent))?);
    }
    let grid_estimate = bidders.iter().map(|r| r.grid_estimate).fold(0.0, f64::max);
    let theorem_bound =
        bound.then(|| bidders.iter().map(|r| r.theorem_bound.unwrap_or(0.0)).fold(0.0, f64::max));
    let report = EpsilonReport {
        method: if bound { VerificationMethod::TheoremBound } else { VerificationMethod::GridEstimate },
        epsilon: theorem_bound.unwrap_or(grid_estimate),
        theorem_bound,
        grid_estimate,
        bidders,
        skipped_bidders: skipped,
        settings: settings.clone(),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(Verification { report, profile: star })
}

fn verify_bidder(
    game: &dyn AuctionGame,
    star: &Profile,
    settings: &VerificationSettings,
    bidder: usize,
    bound: bool,
    independent: bool,
) -> Result<BidderReport> {
    let domain = game.domain();
    let spec = &domain.bidders[bidder];
    let grid = verification_grid(game, bidder, settings.grid_points)?;
    let responder = BestResponder {
        game,
        profile: star,
        samples: settings.samples,
        rng: settings.rng,
        optimizer: settings.optimizer,
        pattern: settings.pattern.clone(),
        bid_ceiling_factor: settings.bid_ceiling_factor,
        crn: true,
    };
    let key = derive_key(settings.seed, &[bidder as u64]);
    let stream = SampleStream::keyed(settings.rng, game.stream_dimension(bidder), key)?;
    let shared: Option<Box<dyn SampleTable>> = if independent {
        Some(game.sample_table(bidder, &grid.point(0), star, &stream, settings.samples)?)
    } else {
        None
    };
    let strategy = star.get(bidder);

    // Best-response utility and the played bid's decomposition at every grid point.
    let per_point: Vec<(f64, UtilityDecomposition)> = (0..grid.len())
        .into_par_iter()
        .map(|k| -> Result<(f64, UtilityDecomposition)> {
            let w = grid.point(k);
            let owned;
            let table: &dyn SampleTable = match &shared {
                Some(t) => t.as_ref(),
                None => {
                    owned = game.sample_table(bidder, &w, star, &stream, settings.samples)?;
                    owned.as_ref()
                }
            };
            let played = strategy.bid(&w)?.0;
            let decomposition = table.evaluate(&played)?;
            let values = spec.atom_values(&w);
            let played_u = decomposition.utility(&values);
            let start = responder.clamp(bidder, &played);
            let opt = responder.maximize(bidder, &start, |b| Ok((table.evaluate(b)?.utility(&values), ())))?;
            Ok((opt.utility.max(played_u), decomposition))
        })
        .collect::<Result<_>>()?;

    let mut estimate = (0.0f64, 0usize);
    for (k, (br, d)) in per_point.iter().enumerate() {
        let loss = br - d.utility(&spec.atom_values(&grid.point(k)));
        if loss > estimate.0 {
            estimate = (loss, k);
        }
    }
    let mut report = BidderReport {
        bidder,
        theorem_bound: None,
        grid_estimate: estimate.0,
        worst_bound_vertex: None,
        worst_bound_cell: None,
        worst_estimate_point: grid.point(estimate.1),
    };
    if bound {
        // Cell k has grid point k as its lower corner; its vertices step one
        // index up per axis, staying put on the top boundary.
        let dims = grid.dims();
        let mut worst = (0.0f64, 0usize, 0usize);
        for (k, (_, d)) in per_point.iter().enumerate() {
            let lower = grid.multi_index(k);
            for corner in 0..1usize << dims {
                let idx: Vec<usize> = (0..dims)
                    .map(|a| (lower[a] + (corner >> (dims - 1 - a) & 1)).min(grid.axes()[a].len() - 1))
                    .collect();
                let j = grid.flat_index(&idx);
                let term = per_point[j].0 - d.utility(&spec.atom_values(&grid.point(j)));
                if term > worst.0 {
                    worst = (term, j, k);
                }
            }
        }
        report.theorem_bound = Some(worst.0);
        report.worst_bound_vertex = Some(grid.point(worst.1));
        report.worst_bound_cell = Some(grid.point(worst.2));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_points: usize,
    pub theorem_bound: Option<f64>,
    pub grid_estimate: f64,
    pub wall_seconds: f64,
}

/// Verifies `profile` once per grid size in `grid_points`, other settings fixed.
pub fn sweep(
    game: &dyn AuctionGame,
    profile: &Profile,
    settings: &VerificationSettings,
    grid_points: &[usize],
) -> Result<Vec<SweepRow>> {
    grid_points
        .iter()
        .map(|&n| {
            let v = verify(game, profile, &VerificationSettings { grid_points: n, ..settings.clone() })?;
            Ok(SweepRow {
                grid_points: n,
                theorem_bound: v.report.theorem_bound,
                grid_estimate: v.report.grid_estimate,
                wall_seconds: v.report.wall_seconds,
            })
        })
        .collect()
}
