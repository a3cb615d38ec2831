//! Run folders: `<out>/<timestamp>-<hash>/` holding the manifest, the
//! verified strategy profile, the epsilon report and the iteration trace.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bne_core::config::RunConfig;
use bne_core::domains::Domain;
use bne_core::pipeline::RunStatus;
use bne_core::search::{SearchOutcome, TraceRow};
use bne_core::strategies::{write_profile, ProfileDocument};
use bne_core::strategies::Profile;
use bne_core::verification::EpsilonReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.txt";
pub const STRATEGY: &str = "strategy.json";
pub const EPSILON: &str = "epsilon.json";
pub const TRACE: &str = "trace.csv";

#[derive(Debug, Serialize)]
pub struct SearchSummary {
    pub converged: bool,
    pub inner_iterations: usize,
    pub outer_passes: usize,
    pub epsilon_estimate: f64,
    pub search_seconds: f64,
}

impl SearchSummary {
    pub fn new(s: &SearchOutcome, search_seconds: f64) -> Self {
        SearchSummary {
            converged: s.converged,
            inner_iterations: s.inner_iterations,
            outer_passes: s.outer_passes,
            epsilon_estimate: s.epsilon_estimate,
            search_seconds,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EpsilonFile<'a> {
    pub status: RunStatus,
    pub target_epsilon: f64,
    pub report: &'a EpsilonReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSummary>,
}

pub fn create_run_dir(out: &Path, cfg: &RunConfig) -> Result<PathBuf> {
    let digest = Sha256::digest(cfg.result_manifest().as_bytes());
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let dir = out.join(format!("{stamp}-{}", &hex::encode(digest)[..12]));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(MANIFEST), cfg.to_manifest()).context("writing manifest")?;
    Ok(dir)
}

pub fn write_strategy(dir: &Path, domain: &Domain, cfg: &RunConfig, profile: &Profile) -> Result<()> {
    let doc = ProfileDocument::from_profile(domain, cfg.mechanism, profile);
    write_profile(&dir.join(STRATEGY), &doc).context("writing strategy file")
}

pub fn write_epsilon(dir: &Path, file: &EpsilonFile<'_>) -> Result<()> {
    fs::write(dir.join(EPSILON), serde_json::to_string_pretty(file)? + "\n").context("writing epsilon report")
}

pub fn write_trace(dir: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(TRACE)).context("writing trace")?;
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
