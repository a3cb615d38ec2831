//! The two shipped auction domains and their bidder populations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BidderSpec, Bundle, Good, Role};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum DomainKind {
    /// Two single-minded locals (goods A and B) and one package bidder on AB.
    /// Local values have CDF v^alpha and coincide with probability gamma.
    Llg { alpha: f64, gamma: f64 },
    /// Four locals and two globals on eight goods arranged in a ring.
    Llllgg,
    /// One bidder for one good against a fixed opposing bid. Test scaffold.
    SingleGood,
}

/// Bidders sharing one strategy (a symmetric group) or a single learner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyGroup {
    pub role: Role,
    pub members: Vec<usize>,
}

impl StrategyGroup {
    /// Bidder whose best responses stand in for the whole group.
    pub fn representative(&self) -> usize {
        self.members[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub kind: DomainKind,
    pub good_labels: Vec<char>,
    pub bidders: Vec<BidderSpec>,
    /// Upper end of every value dimension, per bidder (lower end is 0).
    pub value_hi: Vec<f64>,
}

fn bundle(labels: &str) -> Bundle {
    Bundle::from_goods(labels.bytes().map(|c| Good(c - b'A')))
}

impl Domain {
    pub fn llg(alpha: f64, gamma: f64, global_role: Role) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        let single = |id, b: Bundle, role| BidderSpec {
            id,
            bundles_of_interest: vec![b],
            action_atoms: vec![b],
            role,
        };
        Ok(Domain {
            kind: DomainKind::Llg { alpha, gamma },
            good_labels: vec!['A', 'B'],
            bidders: vec![
                single(0, bundle("A"), Role::Symmetric(0)),
                single(1, bundle("B"), Role::Symmetric(0)),
                single(2, bundle("AB"), global_role),
            ],
            value_hi: vec![1.0, 1.0, 2.0],
        })
    }

    pub fn llllgg() -> Self {
        let spec = |id, a: &str, b: &str, group| {
            let atoms = vec![bundle(a), bundle(b)];
            BidderSpec { id, bundles_of_interest: atoms.clone(), action_atoms: atoms, role: Role::Symmetric(group) }
        };
        Domain {
            kind: DomainKind::Llllgg,
            good_labels: ('A'..='H').collect(),
            bidders: vec![
                spec(0, "AB", "BC", 0),
                spec(1, "CD", "DE", 0),
                spec(2, "EF", "FG", 0),
                spec(3, "GH", "AH", 0),
                spec(4, "ABCD", "EFGH", 1),
                spec(5, "CDEF", "ABGH", 1),
            ],
            value_hi: vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0],
        }
    }

    pub fn single_good() -> Self {
        let a = bundle("A");
        Domain {
            kind: DomainKind::SingleGood,
            good_labels: vec!['A'],
            bidders: vec![BidderSpec { id: 0, bundles_of_interest: vec![a], action_atoms: vec![a], role: Role::Independent }],
            value_hi: vec![1.0],
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DomainKind::Llg { .. } => "llg",
            DomainKind::Llllgg => "llllgg",
            DomainKind::SingleGood => "single_good",
        }
    }

    pub fn bidder_count(&self) -> usize {
        self.bidders.len()
    }

    /// Whether bidders' valuations are mutually independent.
    pub fn independent(&self) -> bool {
        match self.kind {
            DomainKind::Llg { gamma, .. } => gamma == 0.0,
            DomainKind::Llllgg | DomainKind::SingleGood => true,
        }
    }

    pub fn value_dim(&self, bidder: usize) -> usize {
        self.bidders[bidder].value_dim()
    }

    pub fn atom_count(&self, bidder: usize) -> usize {
        self.bidders[bidder].atom_count()
    }

    /// Largest value any atom of `bidder` can have.
    pub fn atom_value_max(&self, bidder: usize) -> f64 {
        self.value_hi[bidder]
    }

    /// Strategy groups in bidder order, excluding fixed-truthful bidders.
    pub fn groups(&self) -> Vec<StrategyGroup> {
        let mut groups: Vec<StrategyGroup> = Vec::new();
        for b in &self.bidders {
            match b.role {
                Role::FixedTruthful => {}
                Role::Independent => groups.push(StrategyGroup { role: b.role, members: vec![b.id] }),
                Role::Symmetric(g) => match groups.iter_mut().find(|x| x.role == Role::Symmetric(g)) {
                    Some(x) => x.members.push(b.id),
                    None => groups.push(StrategyGroup { role: b.role, members: vec![b.id] }),
                },
            }
        }
        groups
    }
}
