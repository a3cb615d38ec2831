//! Auction vocabulary shared by every other module: goods, bundles, bidders,
//! valuations, bids, allocations and outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a good in a domain's good registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Good(pub u8);

/// A set of goods stored as a bitset (at most 64 goods).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bundle(u64);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_goods<I: IntoIterator<Item = Good>>(goods: I) -> Self {
        Bundle(goods.into_iter().fold(0, |acc, g| acc | (1u64 << g.0)))
    }

    pub const fn from_bits(bits: u64) -> Self {
        Bundle(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn intersects(self, other: Bundle) -> bool {
        self.0 & other.0 != 0
    }

    pub const fn union(self, other: Bundle) -> Bundle {
        Bundle(self.0 | other.0)
    }

    /// Whether `self` is a subset of `other`.
    pub const fn is_subset(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, good: Good) -> bool {
        self.0 >> good.0 & 1 == 1
    }

    pub fn goods(self) -> impl Iterator<Item = Good> {
        (0..64u8).filter(move |&g| self.0 >> g & 1 == 1).map(Good)
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.goods().map(|g| g.0)).finish()
    }
}

/// How a bidder participates in the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "group")]
pub enum Role {
    /// Always bids its values; never updated and skipped during verification.
    FixedTruthful,
    /// Shares one strategy with every bidder of the same group.
    Symmetric(usize),
    /// Learns its own strategy.
    Independent,
}

/// Static description of a bidder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidderSpec {
    pub id: usize,
    pub bundles_of_interest: Vec<Bundle>,
    pub action_atoms: Vec<Bundle>,
    pub role: Role,
}

impl BidderSpec {
    pub fn value_dim(&self) -> usize {
        self.bundles_of_interest.len()
    }

    pub fn atom_count(&self) -> usize {
        self.action_atoms.len()
    }

    /// Value of an arbitrary bundle: the entry of the matching bundle of
    /// interest, 0 for the empty bundle or any unmatched bundle.
    pub fn value_of(&self, v: &[f64], bundle: Bundle) -> f64 {
        self.bundles_of_interest
            .iter()
            .position(|&k| k == bundle)
            .map_or(0.0, |k| v[k])
    }

    /// Value of each action atom at `v`.
    pub fn atom_values(&self, v: &[f64]) -> Vec<f64> {
        self.action_atoms.iter().map(|&k| self.value_of(v, k)).collect()
    }

    pub fn utility(&self, v: &[f64], won: Bundle, payment: f64) -> f64 {
        self.value_of(v, won) - payment
    }

    /// Bundles whose value strictly exceeds the value of every proper subset,
    /// i.e. the atoms a straightforward bundle bidder submits at `v`.
    pub fn straightforward_bundles(&self, v: &[f64]) -> Vec<Bundle> {
        self.bundles_of_interest
            .iter()
            .enumerate()
            .filter(|&(k, &bundle)| {
                v[k] > 0.0
                    && self.bundles_of_interest.iter().enumerate().all(|(j, &other)| {
                        j == k || other == bundle || !other.is_subset(bundle) || v[j] < v[k]
                    })
            })
            .map(|(_, &bundle)| bundle)
            .collect()
    }
}

/// A point in a bidder's value space, one entry per bundle of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valuation(pub Vec<f64>);

/// An XOR bid: one amount per action atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid(pub Vec<f64>);

impl Bid {
    pub fn amounts(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub assignments: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(bidders: usize) -> Self {
        Allocation { assignments: vec![Bundle::EMPTY; bidders] }
    }

    /// Pairwise disjointness of all assigned bundles.
    pub fn is_feasible(&self) -> bool {
        let mut taken = Bundle::EMPTY;
        for &b in &self.assignments {
            if b.intersects(taken) {
                return false;
            }
            taken = taken.union(b);
        }
        true
    }

    pub fn winners(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().enumerate().filter(|(_, b)| !b.is_empty()).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub allocation: Allocation,
    pub payments: Vec<f64>,
}

/// Gain from deviating to the best response instead of the played bid.
pub fn utility_loss(best_response_utility: f64, played_utility: f64) -> f64 {
    best_response_utility - played_utility
}
