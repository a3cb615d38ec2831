//! JSON persistence of strategy profiles. Floats are written in shortest
//! round-trip form, so a written profile reads back bit-exactly.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ControlGrid, InterpolatedStrategy, InterpolationMode, Profile, Strategy};
use crate::domains::{Domain, DomainKind};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismKey;
use crate::model::Role;

pub const FORMAT: &str = "bne-profile/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyBody {
    Truthful,
    Interpolated {
        mode: InterpolationMode,
        /// Coordinates per value dimension.
        grid: Vec<Vec<f64>>,
        /// One bid vector per grid point, row-major (last axis fastest).
        bids: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub bidders: Vec<usize>,
    pub role: Role,
    #[serde(flatten)]
    pub body: StrategyBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub format: String,
    pub domain: DomainKind,
    pub mechanism: MechanismKey,
    pub strategies: Vec<StrategyRecord>,
}

fn body_of(s: &Strategy) -> StrategyBody {
    match s {
        Strategy::Truthful => StrategyBody::Truthful,
        Strategy::Interpolated(s) => StrategyBody::Interpolated {
            mode: s.mode(),
            grid: s.grid().axes().to_vec(),
            bids: s.bids().chunks_exact(s.atoms()).map(<[f64]>::to_vec).collect(),
        },
    }
}

impl ProfileDocument {
    /// One record per strategy group and per fixed-truthful bidder.
    pub fn from_profile(domain: &Domain, mechanism: MechanismKey, profile: &Profile) -> Self {
        let mut strategies: Vec<StrategyRecord> = domain
            .groups()
            .into_iter()
            .map(|g| StrategyRecord {
                body: body_of(profile.get(g.representative())),
                bidders: g.members,
                role: g.role,
            })
            .collect();
        for b in domain.bidders.iter().filter(|b| b.role == Role::FixedTruthful) {
            strategies.push(StrategyRecord { bidders: vec![b.id], role: b.role, body: body_of(profile.get(b.id)) });
        }
        ProfileDocument { format: FORMAT.into(), domain: domain.kind, mechanism, strategies }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: ProfileDocument =
            serde_json::from_str(text).map_err(|e| Error::StrategyFile(format!("malformed profile: {e}")))?;
        if doc.format != FORMAT {
            return Err(Error::StrategyFile(format!("unsupported format `{}`", doc.format)));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Builds the profile, validating every record against `domain`.
    pub fn to_profile(&self, domain: &Domain) -> Result<Profile> {
        let n = domain.bidder_count();
        let mut slots: Vec<Option<Arc<Strategy>>> = vec![None; n];
        for (k, rec) in self.strategies.iter().enumerate() {
            let fail = |msg: String| Error::StrategyFile(format!("strategies[{k}]: {msg}"));
            let first = *rec.bidders.first().ok_or_else(|| fail("no bidders listed".into()))?;
            let strategy = match &rec.body {
                StrategyBody::Truthful => Strategy::Truthful,
                StrategyBody::Interpolated { mode, grid, bids } => {
                    let atoms = bids.first().map_or(0, Vec::len);
                    if bids.iter().any(|b| b.len() != atoms) {
                        return Err(fail("bid vectors differ in length".into()));
                    }
                    let grid = ControlGrid::new(grid.clone()).map_err(|e| fail(e.to_string()))?;
                    let flat = bids.iter().flatten().copied().collect();
                    Strategy::Interpolated(
                        InterpolatedStrategy::new(grid, atoms, flat, *mode).map_err(|e| fail(e.to_string()))?,
                    )
                }
            };
            if let Strategy::Interpolated(s) = &strategy {
                let spec = domain.bidders.get(first).ok_or_else(|| fail(format!("unknown bidder {first}")))?;
                if s.grid().dims() != spec.value_dim() || s.atoms() != spec.atom_count() {
                    return Err(fail(format!("shape does not fit bidder {first}")));
                }
            }
            let shared = Arc::new(strategy);
            for &b in &rec.bidders {
                let slot = slots.get_mut(b).ok_or_else(|| fail(format!("unknown bidder {b}")))?;
                if slot.is_some() {
                    return Err(fail(format!("bidder {b} appears twice")));
                }
                *slot = Some(shared.clone());
            }
        }
        let strategies = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| Error::StrategyFile(format!("no strategy for bidder {i}"))))
            .collect::<Result<Vec<_>>>()?;
        let profile = Profile::new(strategies);
        profile.check(domain).map_err(|e| Error::StrategyFile(e.to_string()))?;
        Ok(profile)
    }
}

pub fn write_profile(path: &Path, doc: &ProfileDocument) -> Result<()> {
    std::fs::write(path, doc.to_json()? + "\n")?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<ProfileDocument> {
    ProfileDocument::parse(&std::fs::read_to_string(path)?)
}
