//! Conditional valuation samplers.

use super::estimator::ValueSampler;
use crate::error::{Error, Result};
use crate::strategies::Strategy;

/// LLG prior: locals with CDF `v^alpha` on [0, 1] that coincide with
/// probability `gamma` (and are independent otherwise), package bidder
/// uniform on [0, 2]. Coordinates of a draw: mixture switch, first local
/// value, second value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlgSampler {
    pub alpha: f64,
    pub gamma: f64,
}

impl LlgSampler {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        Ok(LlgSampler { alpha, gamma })
    }

    #[inline]
    pub fn local_value(&self, u: f64) -> f64 {
        if self.alpha == 1.0 {
            u
        } else {
            u.powf(1.0 / self.alpha)
        }
    }

    pub fn local_cdf(&self, v: f64) -> f64 {
        v.clamp(0.0, 1.0).powf(self.alpha)
    }

    #[inline]
    pub fn correlated(&self, u: f64) -> bool {
        u < self.gamma
    }
}

impl ValueSampler for LlgSampler {
    fn dimension(&self, _bidder: usize) -> usize {
        3
    }

    fn sample_conditional(&self, bidder: usize, valuation: &[f64], u: &[f64], out: &mut [Vec<f64>]) -> f64 {
        if bidder < 2 {
            let partner = 1 - bidder;
            out[partner][0] = if self.correlated(u[0]) { valuation[0] } else { self.local_value(u[1]) };
            out[2][0] = 2.0 * u[2];
        } else {
            let v1 = self.local_value(u[1]);
            out[0][0] = v1;
            out[1][0] = if self.correlated(u[0]) { v1 } else { self.local_value(u[2]) };
        }
        1.0
    }
}

/// Importance sampling for a local LLG bidder against a truthful package
/// bidder: the package value is drawn only from the region where the locals
/// win, `[0, min(2, b_i + b_j)]`, and the draw is weighted by that region's
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlgImportanceSampler {
    pub base: LlgSampler,
}

impl LlgImportanceSampler {
    pub fn new(base: LlgSampler) -> Self {
        LlgImportanceSampler { base }
    }

    /// Package value and weight for combined local bids `b_i + b_j`.
    #[inline]
    pub fn truncated_global(b_i: f64, b_j: f64, u: f64) -> (f64, f64) {
        let top = (b_i + b_j).min(2.0);
        (u * top, 0.5 * top)
    }

    /// Partner value, package value and weight for local `bidder` bidding
    /// `b_i` against a partner playing `partner`.
    pub fn sample(&self, valuation: f64, b_i: f64, partner: &Strategy, u: &[f64]) -> Result<(f64, f64, f64)> {
        let v_j = if self.base.correlated(u[0]) { valuation } else { self.base.local_value(u[1]) };
        let mut b_j = [0.0];
        partner.bid_into(&[v_j], &mut b_j)?;
        let (v3, w) = LlgImportanceSampler::truncated_global(b_i, b_j[0], u[2]);
        Ok((v_j, v3, w))
    }
}

/// LLLLGG prior: every bundle value independent and uniform on
/// `[0, value_hi]` of its bidder. Draws list opponents in bidder order, two
/// coordinates each.
#[derive(Debug, Clone, PartialEq)]
pub struct LlllggSampler {
    pub value_hi: Vec<f64>,
}

impl ValueSampler for LlllggSampler {
    fn dimension(&self, _bidder: usize) -> usize {
        2 * (self.value_hi.len() - 1)
    }

    fn sample_conditional(&self, bidder: usize, _valuation: &[f64], u: &[f64], out: &mut [Vec<f64>]) -> f64 {
        let mut k = 0;
        for (j, o) in out.iter_mut().enumerate() {
            if j != bidder {
                o[0] = u[k] * self.value_hi[j];
                o[1] = u[k + 1] * self.value_hi[j];
                k += 2;
            }
        }
        1.0
    }
}
