//! Derivative-free maximization over a box by pattern search.
//!
//! The pattern is a full grid of `points_per_dim` points per axis centred on
//! the incumbent. A step that finds a strictly better point moves there; a
//! step that finds none halves the spacing. Moves cost `move_cost` budget units
//! and shrinks `shrink_cost`, so a search that only shrinks ends with spacing
//! `initial_spacing · 2^−budget`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSearchConfig {
    pub points_per_dim: usize,
    pub initial_spacing: f64,
    pub budget: i32,
    pub move_cost: i32,
    pub shrink_cost: i32,
}

impl PatternSearchConfig {
    pub fn with_budget(initial_spacing: f64, budget: i32) -> Self {
        PatternSearchConfig { points_per_dim: 3, initial_spacing, budget, move_cost: 2, shrink_cost: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.points_per_dim < 3 || self.points_per_dim.is_multiple_of(2) {
            return Err(Error::InvalidArgument("pattern needs an odd point count of at least 3".into()));
        }
        if !(self.initial_spacing > 0.0) || self.move_cost < 1 || self.shrink_cost < 1 {
            return Err(Error::InvalidArgument("pattern spacing and step costs must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a one-bidder maximization.
#[derive(Debug, Clone)]
pub struct Optimum<T> {
    pub bid: Vec<f64>,
    pub utility: f64,
    pub payload: T,
    /// Distinct objective evaluations, including the start.
    pub evaluations: usize,
    pub final_spacing: f64,
}

/// Maximizes `f` over `[0, ceiling]` starting at `start` (clamped into the box).
///
/// The start is always evaluated and only strictly better points replace the
/// incumbent, so the returned utility is never below the start's. Repeated
/// points are served from a cache keyed by their exact bit pattern.
pub fn pattern_search<T: Clone>(
    start: &[f64],
    ceiling: &[f64],
    cfg: &PatternSearchConfig,
    mut f: impl FnMut(&[f64]) -> Result<(f64, T)>,
) -> Result<Optimum<T>> {
    cfg.validate()?;
    if start.len() != ceiling.len() || start.is_empty() {
        return Err(Error::InvalidArgument("start and ceiling must have the same positive length".into()));
    }
    let dims = start.len();
    let mut cache: HashMap<Vec<u64>, (f64, T)> = HashMap::new();
    let mut eval = |x: &[f64], cache: &mut HashMap<Vec<u64>, (f64, T)>| -> Result<(f64, T)> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.clone());
        }
        let r = f(x)?;
        if !r.0.is_finite() {
            return Err(Error::InvalidArgument(format!("objective returned {} at {x:?}", r.0)));
        }
        cache.insert(key, r.clone());
        Ok(r)
    };

    let clamp = |x: f64, k: usize| x.clamp(0.0, ceiling[k]);
    let mut best: Vec<f64> = start.iter().enumerate().map(|(k, &x)| clamp(x, k)).collect();
    let (mut best_u, mut best_payload) = eval(&best, &mut cache)?;
    let half = (cfg.points_per_dim / 2) as i64;
    let offsets: Vec<i64> = (-half..=half).collect();
    let pattern_size = cfg.points_per_dim.pow(dims as u32);
    let mut spacing = cfg.initial_spacing;
    let mut budget = cfg.budget;
    let mut candidate = vec![0.0; dims];

    while budget > 0 {
        let centre = best.clone();
        let mut moved = false;
        for p in 0..pattern_size {
            let mut rest = p;
            for k in (0..dims).rev() {
                let o = offsets[rest % cfg.points_per_dim];
                rest /= cfg.points_per_dim;
                candidate[k] = clamp(centre[k] + o as f64 * spacing, k);
            }
            if candidate == centre {
                continue;
            }
            let (u, payload) = eval(&candidate, &mut cache)?;
            if u > best_u {
                best_u = u;
                best_payload = payload;
                best.copy_from_slice(&candidate);
                moved = true;
            }
        }
        if moved {
            budget -= cfg.move_cost;
        } else {
            spacing *= 0.5;
            budget -= cfg.shrink_cost;
        }
    }
    Ok(Optimum { bid: best, utility: best_u, payload: best_payload, evaluations: cache.len(), final_spacing: spacing })
}
