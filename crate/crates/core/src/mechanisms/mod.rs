//! Allocation and payment rules.

mod core_payments;
mod llg;
mod llllgg;
pub mod lp;
pub mod qp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bid, Outcome};

pub use core_payments::{core_constraints, min_core_revenue, vcg_nearest_payments, CoreConstraint, CorePoint};
pub use llg::{llg_allocate, llg_global_payment, llg_local_payment, llg_payments, LlgMechanism};
pub use llllgg::{
    llllgg_payments, llllgg_winner_determination, Assignment, CoalitionValueCache, LlllggMechanism, LlllggStructure,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlgRule {
    FirstPrice,
    Vcg,
    VcgNearest,
    NearestBid,
    Proxy,
    Proportional,
}

impl LlgRule {
    pub const ALL: [LlgRule; 6] = [
        LlgRule::FirstPrice,
        LlgRule::Vcg,
        LlgRule::VcgNearest,
        LlgRule::NearestBid,
        LlgRule::Proxy,
        LlgRule::Proportional,
    ];

    /// Rules under which truthful bidding is dominant for the package bidder.
    pub fn global_truthful(self) -> bool {
        self != LlgRule::FirstPrice
    }

    pub fn name(self) -> &'static str {
        match self {
            LlgRule::FirstPrice => "first_price",
            LlgRule::Vcg => "vcg",
            LlgRule::VcgNearest => "vcg_nearest",
            LlgRule::NearestBid => "nearest_bid",
            LlgRule::Proxy => "proxy",
            LlgRule::Proportional => "proportional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlllggRule {
    FirstPrice,
    VcgNearest,
}

impl LlllggRule {
    pub fn name(self) -> &'static str {
        match self {
            LlllggRule::FirstPrice => "first_price",
            LlllggRule::VcgNearest => "vcg_nearest",
        }
    }
}

/// Fully qualified mechanism selector such as `llg.proxy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MechanismKey {
    Llg(LlgRule),
    Llllgg(LlllggRule),
}

impl fmt::Display for MechanismKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismKey::Llg(r) => write!(f, "llg.{}", r.name()),
            MechanismKey::Llllgg(r) => write!(f, "llllgg.{}", r.name()),
        }
    }
}

impl FromStr for MechanismKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown mechanism `{s}`"));
        let (domain, rule) = s.split_once('.').ok_or_else(bad)?;
        match domain {
            "llg" => LlgRule::ALL.into_iter().find(|r| r.name() == rule).map(MechanismKey::Llg).ok_or_else(bad),
            "llllgg" => match rule {
                "first_price" => Ok(MechanismKey::Llllgg(LlllggRule::FirstPrice)),
                "vcg_nearest" => Ok(MechanismKey::Llllgg(LlllggRule::VcgNearest)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl Serialize for MechanismKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MechanismKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A sealed-bid mechanism mapping reported bids to an outcome.
pub trait Mechanism: Send + Sync {
    fn bidder_count(&self) -> usize;

    fn run(&self, bids: &[Bid]) -> Result<Outcome>;
}

pub fn build_mechanism(key: MechanismKey) -> Box<dyn Mechanism> {
    match key {
        MechanismKey::Llg(rule) => Box::new(LlgMechanism::new(rule)),
        MechanismKey::Llllgg(rule) => Box::new(LlllggMechanism::new(rule)),
    }
}
