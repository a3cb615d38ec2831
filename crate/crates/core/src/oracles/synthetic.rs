//! One bidder for one good against an opposing bid drawn from U[0,1].
//!
//! Bidding `b` wins with probability `clamp(b, 0, 1)` and pays `b` on a win,
//! so `u(v, b) = (v − b) · b` on `[0, 1]` with best response `v / 2` and
//! best-response utility `v² / 4`.

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::sampling::{AuctionGame, SampleStream, SampleTable, UtilityDecomposition};
use crate::strategies::Profile;

pub fn synthetic_utility(v: f64, b: f64) -> f64 {
    (v - b) * b.clamp(0.0, 1.0)
}

pub fn synthetic_best_response_utility(v: f64) -> f64 {
    v * v / 4.0
}

/// Exact expectations, or Monte Carlo over the opposing bid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticIntegration {
    ClosedForm,
    MonteCarlo,
}

pub struct SyntheticFirstPrice {
    domain: Domain,
    integration: SyntheticIntegration,
}

impl SyntheticFirstPrice {
    pub fn new(integration: SyntheticIntegration) -> Self {
        SyntheticFirstPrice { domain: Domain::single_good(), integration }
    }
}

impl AuctionGame for SyntheticFirstPrice {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn stream_dimension(&self, _bidder: usize) -> usize {
        1
    }

    fn sample_table(
        &self,
        bidder: usize,
        _valuation: &[f64],
        _profile: &Profile,
        stream: &SampleStream,
        n: usize,
    ) -> Result<Box<dyn SampleTable>> {
        if bidder != 0 {
            return Err(Error::InvalidArgument(format!("single-good game has one bidder, got {bidder}")));
        }
        Ok(match self.integration {
            SyntheticIntegration::ClosedForm => Box::new(ClosedFormTable),
            SyntheticIntegration::MonteCarlo => Box::new(DrawTable { opposing: stream.generate(n)? }),
        })
    }
}

struct ClosedFormTable;

impl SampleTable for ClosedFormTable {
    fn atoms(&self) -> usize {
        1
    }

    fn len(&self) -> usize {
        1
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let win = bid[0].clamp(0.0, 1.0);
        Ok(UtilityDecomposition { win_prob: vec![win], empty_prob: 1.0 - win, expected_payment: bid[0] * win, n_samples: 1 })
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.evaluate(bid)?.utility(atom_values)])
    }
}

struct DrawTable {
    opposing: Vec<f64>,
}

impl SampleTable for DrawTable {
    fn atoms(&self) -> usize {
        1
    }

    fn len(&self) -> usize {
        self.opposing.len()
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let wins = self.opposing.iter().filter(|&&o| bid[0] > o).count() as f64 / self.len() as f64;
        Ok(UtilityDecomposition {
            win_prob: vec![wins],
            empty_prob: 1.0 - wins,
            expected_payment: bid[0] * wins,
            n_samples: self.len(),
        })
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        Ok(self.opposing.iter().map(|&o| if bid[0] > o { atom_values[0] - bid[0] } else { 0.0 }).collect())
    }
}
