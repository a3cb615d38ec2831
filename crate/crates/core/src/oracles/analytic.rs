//! Known closed-form equilibria for cross-checking solved strategies.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mechanisms::LlgRule;
use crate::oracles::formula::Piecewise;
use crate::strategies::Strategy;

/// Equilibrium bid of a local bidder under the nearest-bid rule with local
/// value CDF `v²` and correlation `gamma`.
pub fn nearest_bid_corrected(v: f64, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let root = (2.0 / (1.0 - gamma)).sqrt();
    if !(0.0..root).contains(&v) {
        return Err(Error::InvalidArgument(format!("value {v} outside [0, {root})")));
    }
    Ok(((root + v).ln() - (root - v).ln()) / (8.0 * (1.0 - gamma)).sqrt())
}

#[derive(Clone)]
enum Form {
    NearestBid,
    Formula(Arc<Piecewise>),
}

/// Local-bidder equilibrium strategy of an LLG setting.
#[derive(Clone)]
pub struct AnalyticStrategy {
    pub rule: LlgRule,
    pub alpha: f64,
    pub gamma: f64,
    /// Where the formula comes from.
    pub source: String,
    form: Form,
}

impl AnalyticStrategy {
    /// The built-in nearest-bid equilibrium (requires `alpha = 2`).
    pub fn nearest_bid(gamma: f64) -> Result<Self> {
        nearest_bid_corrected(0.0, gamma)?;
        Ok(AnalyticStrategy {
            rule: LlgRule::NearestBid,
            alpha: 2.0,
            gamma,
            source: "built-in nearest-bid closed form".into(),
            form: Form::NearestBid,
        })
    }

    pub fn from_formula(rule: LlgRule, alpha: f64, gamma: f64, source: String, formula: Piecewise) -> Self {
        AnalyticStrategy { rule, alpha, gamma, source, form: Form::Formula(Arc::new(formula)) }
    }

    pub fn bid(&self, v: f64) -> Result<f64> {
        match &self.form {
            Form::NearestBid => nearest_bid_corrected(v, self.gamma),
            Form::Formula(f) => f.evaluate(v, self.alpha, self.gamma),
        }
    }
}

/// Largest absolute bid difference over `probe_points` evenly spaced values in `[0, 1]`.
pub fn l_infinity_distance(s: &Strategy, oracle: &AnalyticStrategy, probe_points: usize) -> Result<f64> {
    if probe_points < 2 {
        return Err(Error::InvalidArgument("need at least two probe points".into()));
    }
    let mut worst = 0.0f64;
    let mut out = [0.0];
    for k in 0..probe_points {
        let v = if k + 1 == probe_points { 1.0 } else { k as f64 / (probe_points - 1) as f64 };
        s.bid_into(&[v], &mut out)?;
        worst = worst.max((out[0] - oracle.bid(v)?).abs());
    }
    Ok(worst)
}
