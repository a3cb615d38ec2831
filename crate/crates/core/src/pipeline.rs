//! Search followed by verification, as driven by a [`RunConfig`].

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::sampling::{build_game, AuctionGame};
use crate::search::{run_search, SearchOutcome};
use crate::strategies::Profile;
use crate::verification::{verify, Verification, VerificationSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    VerifiedBelowTarget,
    VerifiedAboveTarget,
    NonConverged,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub search: SearchOutcome,
    pub verification: Verification,
    pub status: RunStatus,
    pub search_seconds: f64,
    pub total_seconds: f64,
}

pub fn game_for(cfg: &RunConfig) -> Result<Arc<dyn AuctionGame>> {
    build_game(cfg.domain, cfg.mechanism, cfg.integrator, cfg.quadrature_grid)
}

/// Searches from the truthful profile and verifies the result.
pub fn solve(cfg: &RunConfig) -> Result<SolveResult> {
    let game = game_for(cfg)?;
    solve_with(game.as_ref(), cfg, Profile::truthful(game.domain().bidder_count()))
}

pub fn solve_with(game: &dyn AuctionGame, cfg: &RunConfig, initial: Profile) -> Result<SolveResult> {
    let started = Instant::now();
    let search = run_search(game, cfg, initial)?;
    let search_seconds = started.elapsed().as_secs_f64();
    let verification = verify(game, &search.profile, &VerificationSettings::from_config(cfg))?;
    let status = if !search.converged {
        RunStatus::NonConverged
    } else if verification.report.epsilon <= cfg.target_epsilon {
        RunStatus::VerifiedBelowTarget
    } else {
        RunStatus::VerifiedAboveTarget
    };
    Ok(SolveResult { search, verification, status, search_seconds, total_seconds: started.elapsed().as_secs_f64() })
}

/// Verifies `profile` without searching.
pub fn verify_only(cfg: &RunConfig, profile: &Profile) -> Result<Verification> {
    let game = game_for(cfg)?;
    verify(game.as_ref(), profile, &VerificationSettings::from_config(cfg))
}
