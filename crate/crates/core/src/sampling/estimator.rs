//! Expected-utility estimation.
//!
//! Opponents' bids do not depend on the bid under evaluation, so for one
//! bidder and valuation all opponent draws are materialized once into a
//! [`SampleTable`]; every candidate bid is then scored against the same table,
//! which realizes common random numbers and keeps each evaluation cheap.

use std::str::FromStr;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::stream::SampleStream;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::model::{Bid, Bundle};
use crate::strategies::Profile;

/// Weighted win frequency per action atom and mean payment. The estimate is
/// linear in the bidder's atom values: `Σ_k value_k · win_prob_k − payment`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityDecomposition {
    pub win_prob: Vec<f64>,
    pub empty_prob: f64,
    pub expected_payment: f64,
    pub n_samples: usize,
}

impl UtilityDecomposition {
    pub fn utility(&self, atom_values: &[f64]) -> f64 {
        self.win_prob.iter().zip(atom_values).map(|(c, v)| c * v).sum::<f64>() - self.expected_payment
    }
}

/// Opponent draws for one bidder at one valuation.
pub trait SampleTable: Send + Sync {
    fn atoms(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition>;

    /// Weighted utility contributed by each draw; their mean is the estimate.
    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Mc,
    McImportance,
    Quadrature,
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Integrator::Mc),
            "mc_importance" => Ok(Integrator::McImportance),
            "quadrature" => Ok(Integrator::Quadrature),
            _ => Err(Error::Config(format!("unknown integrator `{s}`"))),
        }
    }
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Mc => "mc",
            Integrator::McImportance => "mc_importance",
            Integrator::Quadrature => "quadrature",
        }
    }
}

/// An auction setting: domain, prior and mechanism, able to build sample
/// tables for any bidder.
pub trait AuctionGame: Send + Sync {
    fn domain(&self) -> &Domain;

    /// Unit-hypercube dimension consumed per draw for `bidder`.
    fn stream_dimension(&self, bidder: usize) -> usize;

    fn sample_table(
        &self,
        bidder: usize,
        valuation: &[f64],
        profile: &Profile,
        stream: &SampleStream,
        n: usize,
    ) -> Result<Box<dyn SampleTable>>;
}

/// Estimated expected utility of `bid` at `valuation` with its decomposition.
pub fn estimate_expected_utility(
    game: &dyn AuctionGame,
    bidder: usize,
    valuation: &[f64],
    bid: &[f64],
    profile: &Profile,
    stream: &SampleStream,
    n: usize,
) -> Result<(f64, UtilityDecomposition)> {
    let table = game.sample_table(bidder, valuation, profile, stream, n)?;
    let d = table.evaluate(bid)?;
    let values = game.domain().bidders[bidder].atom_values(valuation);
    Ok((d.utility(&values), d))
}

/// Paired estimate of `u(bid_a) − u(bid_b)` on one shared stream.
#[allow(clippy::too_many_arguments)]
pub fn common_random_compare(
    game: &dyn AuctionGame,
    bidder: usize,
    valuation: &[f64],
    bid_a: &[f64],
    bid_b: &[f64],
    profile: &Profile,
    stream: &SampleStream,
    n: usize,
) -> Result<f64> {
    let table = game.sample_table(bidder, valuation, profile, stream, n)?;
    let values = game.domain().bidders[bidder].atom_values(valuation);
    Ok(table.evaluate(bid_a)?.utility(&values) - table.evaluate(bid_b)?.utility(&values))
}

/// Draws opponent valuations conditional on the bidder's own valuation.
pub trait ValueSampler: Send + Sync {
    fn dimension(&self, bidder: usize) -> usize;

    /// Writes every opponent's valuation into `out` (the bidder's own slot is
    /// left untouched) and returns the draw's weight.
    fn sample_conditional(&self, bidder: usize, valuation: &[f64], u: &[f64], out: &mut [Vec<f64>]) -> f64;
}

/// Mechanism-driven setting: runs the full mechanism on every draw. Slower
/// than the domain-specific tables but applicable to any mechanism.
pub struct MechanismGame {
    domain: Domain,
    mechanism: Arc<dyn Mechanism>,
    sampler: Box<dyn ValueSampler>,
}

impl MechanismGame {
    pub fn new(domain: Domain, mechanism: Arc<dyn Mechanism>, sampler: Box<dyn ValueSampler>) -> Self {
        MechanismGame { domain, mechanism, sampler }
    }
}

impl AuctionGame for MechanismGame {
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
        if stream.dimension != dim {
            return Err(Error::InvalidArgument(format!("stream dimension {} != {dim}", stream.dimension)));
        }
        let points = stream.generate(n)?;
        let mut values: Vec<Vec<f64>> =
            self.domain.bidders.iter().map(|b| vec![0.0; b.value_dim()]).collect();
        let mut draws = Vec::with_capacity(n);
        for u in points.chunks_exact(dim) {
            let weight = self.sampler.sample_conditional(bidder, valuation, u, &mut values);
            let mut bids = Vec::with_capacity(values.len());
            for (j, v) in values.iter().enumerate() {
                let mut b = Bid(vec![0.0; self.domain.atom_count(j)]);
                if j != bidder {
                    profile.get(j).bid_into(v, &mut b.0)?;
                }
                bids.push(b);
            }
            draws.push((weight, bids));
        }
        Ok(Box::new(MechanismTable {
            mechanism: self.mechanism.clone(),
            atoms: self.domain.bidders[bidder].action_atoms.clone(),
            bidder,
            draws,
        }))
    }
}

struct MechanismTable {
    mechanism: Arc<dyn Mechanism>,
    atoms: Vec<Bundle>,
    bidder: usize,
    draws: Vec<(f64, Vec<Bid>)>,
}

impl MechanismTable {
    fn outcomes(&self, bid: &[f64]) -> Result<Vec<(f64, Option<usize>, f64)>> {
        let mut bids = Vec::new();
        self.draws
            .iter()
            .map(|(w, draw)| {
                bids.clone_from(draw);
                bids[self.bidder] = Bid(bid.to_vec());
                let out = self.mechanism.run(&bids)?;
                let won = out.allocation.assignments[self.bidder];
                let atom = self.atoms.iter().position(|&k| k == won && !won.is_empty());
                Ok((*w, atom, out.payments[self.bidder]))
            })
            .collect()
    }
}

impl SampleTable for MechanismTable {
    fn atoms(&self) -> usize {
        self.atoms.len()
    }

    fn len(&self) -> usize {
        self.draws.len()
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let n = self.draws.len();
        let mut win_prob = vec![0.0; self.atoms.len()];
        let mut pay = 0.0;
        for (w, atom, p) in self.outcomes(bid)? {
            if let Some(k) = atom {
                win_prob[k] += w;
            }
            pay += w * p;
        }
        let inv = 1.0 / n as f64;
        win_prob.iter_mut().for_each(|c| *c *= inv);
        let empty_prob = 1.0 - win_prob.iter().sum::<f64>();
        Ok(UtilityDecomposition { win_prob, empty_prob, expected_payment: pay * inv, n_samples: n })
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .outcomes(bid)?
            .into_iter()
            .map(|(w, atom, p)| w * (atom.map_or(0.0, |k| atom_values[k]) - p))
            .collect())
    }
}
