//! First-price LLLLGG sample tables.
//!
//! For each draw the opponents' optimal welfare is computed three times: with
//! all goods available and with either of the bidder's atoms reserved. The
//! bidder then wins atom `k` exactly when its bid exceeds the welfare it
//! displaces, so every candidate bid is scored in constant time per draw.

use super::estimator::{AuctionGame, SampleTable, UtilityDecomposition, ValueSampler};
use super::samplers::LlllggSampler;
use super::stream::SampleStream;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::mechanisms::LlllggStructure;
use crate::strategies::Profile;

const BIDDERS: usize = 6;

/// A feasible assignment of the other five bidders.
#[derive(Debug, Clone)]
struct OpponentAssignment {
    /// Indices into the flattened `6 × 2` bid array.
    picks: Vec<usize>,
    fits: [bool; 2],
}

pub struct LlllggFirstPriceGame {
    domain: Domain,
    sampler: LlllggSampler,
    opponents: Vec<Vec<OpponentAssignment>>,
}

impl Default for LlllggFirstPriceGame {
    fn default() -> Self {
        Self::new()
    }
}

impl LlllggFirstPriceGame {
    pub fn new() -> Self {
        let domain = Domain::llllgg();
        let s = LlllggStructure::get();
        let opponents = (0..BIDDERS)
            .map(|i| {
                s.feasible
                    .iter()
                    .filter(|a| a.choices[i] == 0)
                    .map(|a| {
                        let mut picks = Vec::new();
                        let mut taken = crate::model::Bundle::EMPTY;
                        for (j, &c) in a.choices.iter().enumerate() {
                            if c != 0 {
                                picks.push(2 * j + c as usize - 1);
                                taken = taken.union(s.atoms[j][c as usize - 1]);
                            }
                        }
                        let fits = [!taken.intersects(s.atoms[i][0]), !taken.intersects(s.atoms[i][1])];
                        OpponentAssignment { picks, fits }
                    })
                    .collect()
            })
            .collect();
        let sampler = LlllggSampler { value_hi: domain.value_hi.clone() };
        LlllggFirstPriceGame { domain, sampler, opponents }
    }
}

impl AuctionGame for LlllggFirstPriceGame {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn stream_dimension(&self, bidder: usize) -> usize {
        self.sampler.dimension(bidder)
    }

    fn sample_table(
        &self,
        bidder: usize,
        valuation: &[f64],
        profile: &Profile,
        stream: &SampleStream,
        n: usize,
    ) -> Result<Box<dyn SampleTable>> {
        let dim = self.sampler.dimension(bidder);
        if bidder >= BIDDERS || stream.dimension != dim {
            return Err(Error::InvalidArgument(format!("bad bidder {bidder} or stream dimension {}", stream.dimension)));
        }
        let pts = stream.generate(n)?;
        let mut values = vec![vec![0.0; 2]; BIDDERS];
        let mut flat = [0.0; 2 * BIDDERS];
        let mut rows = Vec::with_capacity(n);
        for u in pts.chunks_exact(dim) {
            self.sampler.sample_conditional(bidder, valuation, u, &mut values);
            for j in (0..BIDDERS).filter(|&j| j != bidder) {
                profile.get(j).bid_into(&values[j], &mut flat[2 * j..2 * j + 2])?;
            }
            let (mut full, mut w1, mut w2) = (0.0f64, 0.0f64, 0.0f64);
            for a in &self.opponents[bidder] {
                let w: f64 = a.picks.iter().map(|&k| flat[k]).sum();
                full = full.max(w);
                if a.fits[0] {
                    w1 = w1.max(w);
                }
                if a.fits[1] {
                    w2 = w2.max(w);
                }
            }
            rows.push([full - w1, full - w2]);
        }
        Ok(Box::new(ThresholdTable { rows }))
    }
}

/// Welfare displaced by winning each atom, per draw.
struct ThresholdTable {
    rows: Vec<[f64; 2]>,
}

impl ThresholdTable {
    /// Won atom and payment of `bid` on one draw.
    #[inline]
    fn outcome(bid: &[f64], t: &[f64; 2]) -> Option<usize> {
        let g1 = bid[0] - t[0];
        let g2 = bid[1] - t[1];
        if g1 > 0.0 && g1 >= g2 {
            Some(0)
        } else if g2 > 0.0 {
            Some(1)
        } else {
            None
        }
    }
}

impl SampleTable for ThresholdTable {
    fn atoms(&self) -> usize {
        2
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let mut wins = [0u64; 2];
        for t in &self.rows {
            if let Some(k) = ThresholdTable::outcome(bid, t) {
                wins[k] += 1;
            }
        }
        let n = self.rows.len();
        let inv = 1.0 / n as f64;
        let win_prob = vec![wins[0] as f64 * inv, wins[1] as f64 * inv];
        let expected_payment = win_prob[0] * bid[0] + win_prob[1] * bid[1];
        let empty_prob = (n as u64 - wins[0] - wins[1]) as f64 * inv;
        Ok(UtilityDecomposition { win_prob, empty_prob, expected_payment, n_samples: n })
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .rows
            .iter()
            .map(|t| ThresholdTable::outcome(bid, t).map_or(0.0, |k| atom_values[k] - bid[k]))
            .collect())
    }
}
