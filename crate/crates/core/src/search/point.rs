//! Pointwise best responses against a fixed opponent profile.

use std::cell::Cell;

use crate::config::Optimizer;
use crate::error::{Error, Result};
use crate::sampling::{derive_key, AuctionGame, RngKind, SampleStream, SampleTable};
use crate::search::brent::brent_maximize;
use crate::search::pattern::{pattern_search, Optimum, PatternSearchConfig};
use crate::strategies::Profile;

const BRENT_TOLERANCE: f64 = 1e-7;
const BRENT_ITERATIONS: usize = 200;

/// Everything a best response at one valuation needs besides the valuation.
pub struct BestResponder<'a> {
    pub game: &'a dyn AuctionGame,
    pub profile: &'a Profile,
    pub samples: usize,
    pub rng: RngKind,
    pub optimizer: Optimizer,
    pub pattern: PatternSearchConfig,
    pub bid_ceiling_factor: f64,
    /// Evaluate every candidate bid on the same draws.
    pub crn: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub bid: Vec<f64>,
    pub utility: f64,
    pub incumbent_utility: f64,
    /// `utility − incumbent_utility`, never negative.
    pub loss: f64,
    pub evaluations: usize,
}

impl BestResponder<'_> {
    pub fn ceiling(&self, bidder: usize) -> Vec<f64> {
        let hi = self.bid_ceiling_factor * self.game.domain().atom_value_max(bidder);
        vec![hi; self.game.domain().atom_count(bidder)]
    }

    /// `bid` clamped into `[0, ceiling]`.
    pub fn clamp(&self, bidder: usize, bid: &[f64]) -> Vec<f64> {
        bid.iter().zip(self.ceiling(bidder)).map(|(b, c)| b.clamp(0.0, c)).collect()
    }

    /// Maximizes `score` over the bidder's bid box starting at `start`.
    pub fn maximize(
        &self,
        bidder: usize,
        start: &[f64],
        mut score: impl FnMut(&[f64]) -> Result<(f64, ())>,
    ) -> Result<Optimum<()>> {
        let ceiling = self.ceiling(bidder);
        match self.optimizer {
            Optimizer::Pattern => pattern_search(start, &ceiling, &self.pattern, score),
            Optimizer::Brent => {
                if start.len() != 1 {
                    return Err(Error::Unsupported("brent search needs a single-atom bidder".into()));
                }
                brent_maximize(0.0, ceiling[0], start[0], BRENT_TOLERANCE, BRENT_ITERATIONS, |x| score(&[x]))
            }
        }
    }

    fn table(&self, bidder: usize, valuation: &[f64], key: u64) -> Result<Box<dyn SampleTable>> {
        let stream = SampleStream::keyed(self.rng, self.game.stream_dimension(bidder), key)?;
        self.game.sample_table(bidder, valuation, self.profile, &stream, self.samples)
    }

    /// Best response of `bidder` at `valuation`, starting from `incumbent`.
    ///
    /// With common random numbers every candidate is scored on the draws
    /// identified by `key`; otherwise each score uses fresh draws derived
    /// from `key` and a counter.
    pub fn best_response(&self, bidder: usize, valuation: &[f64], incumbent: &[f64], key: u64) -> Result<PointResult> {
        let values = self.game.domain().bidders[bidder].atom_values(valuation);
        let shared = if self.crn { Some(self.table(bidder, valuation, key)?) } else { None };
        let counter = Cell::new(0u64);
        let score = |bid: &[f64]| -> Result<(f64, ())> {
            let d = match &shared {
                Some(t) => t.evaluate(bid)?,
                None => {
                    let c = counter.get();
                    counter.set(c + 1);
                    self.table(bidder, valuation, derive_key(key, &[c]))?.evaluate(bid)?
                }
            };
            Ok((d.utility(&values), ()))
        };
        let start = self.clamp(bidder, incumbent);
        let incumbent_utility = score(&start)?.0;
        let opt = self.maximize(bidder, &start, score)?;
        // On a shared stream the search re-scores the start identically, so the
        // optimum is at least the incumbent. Fresh draws can disagree; keep the
        // incumbent's own score as the reference.
        let (bid, utility) = if opt.utility >= incumbent_utility {
            (opt.bid, opt.utility)
        } else {
            (start, incumbent_utility)
        };
        Ok(PointResult {
            loss: utility - incumbent_utility,
            bid,
            utility,
            incumbent_utility,
            evaluations: opt.evaluations + 1,
        })
    }
}
