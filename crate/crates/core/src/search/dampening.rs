//! Dampened strategy updates.
//!
//! At each control point the new bid is the convex combination
//! `(1 − w) · old + w · best_response` with a weight that grows with the
//! point's utility loss.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategies::{InterpolatedStrategy, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampeningConfig {
    /// `w = (2/π) · atan(c · loss) · (w_max − w_min) + w_min`.
    Adaptive { w_min: f64, w_max: f64, c: f64 },
    Fixed { w: f64 },
}

impl DampeningConfig {
    pub fn adaptive_for_target(target_epsilon: f64) -> Self {
        DampeningConfig::Adaptive { w_min: 0.2, w_max: 0.7, c: 1.0 / (2.0 * target_epsilon) }
    }

    pub fn weight(&self, loss: f64) -> f64 {
        match *self {
            DampeningConfig::Adaptive { w_min, w_max, c } => dampening_weight(loss, w_min, w_max, c),
            DampeningConfig::Fixed { w } => w,
        }
    }
}

pub fn dampening_weight(loss: f64, w_min: f64, w_max: f64, c: f64) -> f64 {
    FRAC_2_PI * (c * loss.max(0.0)).atan() * (w_max - w_min) + w_min
}

/// `(1 − w) · old + w · br` per component, clamped onto the segment between them.
pub fn update_bid(old: &[f64], br: &[f64], w: f64, out: &mut [f64]) {
    for ((o, &a), &b) in out.iter_mut().zip(old).zip(br) {
        let x = (1.0 - w) * a + w * b;
        *o = x.clamp(a.min(b), a.max(b));
    }
}

/// Dampened update on the best response's control grid.
///
/// `losses[k]` is the utility loss of the incumbent at control point `k`; the
/// incumbent `old` is evaluated at the new grid's points.
pub fn update_strategy(
    old: &Strategy,
    br: &InterpolatedStrategy,
    losses: &[f64],
    cfg: &DampeningConfig,
) -> Result<InterpolatedStrategy> {
    let grid = br.grid();
    if losses.len() != grid.len() {
        return Err(Error::InvalidArgument(format!("{} losses for {} control points", losses.len(), grid.len())));
    }
    let atoms = br.atoms();
    let mut bids = vec![0.0; grid.len() * atoms];
    let mut prev = vec![0.0; atoms];
    for (k, chunk) in bids.chunks_exact_mut(atoms).enumerate() {
        old.bid_into(&grid.point(k), &mut prev)?;
        update_bid(&prev, br.bid_at(k), cfg.weight(losses[k]), chunk);
    }
    InterpolatedStrategy::new(grid.clone(), atoms, bids, br.mode())
}
