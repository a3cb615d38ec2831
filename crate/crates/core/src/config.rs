//! Run configuration as flat `key = value` pairs.
//!
//! Defaults depend on the domain and mechanism, so `domain` and `mechanism`
//! are resolved first and every other key overrides the resulting defaults.
//! [`RunConfig::to_manifest`] writes every key, which reproduces a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::mechanisms::{LlgRule, MechanismKey};
use crate::sampling::{Integrator, RngKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlPointMode {
    Adaptive,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Pattern,
    Brent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampeningMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationMethod {
    /// Theorem bound for independent domains, grid estimate otherwise.
    Auto,
    TheoremBound,
    GridEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainKind,
    pub mechanism: MechanismKey,
    pub target_epsilon: f64,
    /// Inner loop exits once the estimated epsilon is at most this fraction of the target.
    pub inner_gate: f64,
    pub control_points: ControlPointMode,
    pub grid_initial: usize,
    /// Inner-loop control points: total count (adaptive, 1-D) or per axis (even).
    pub grid_inner: usize,
    pub grid_outer: usize,
    pub grid_verification: usize,
    /// Smallest interval adaptive placement may split; 0 selects a quarter of the
    /// average final spacing.
    pub grid_min_interval: f64,
    pub samples_search: usize,
    pub samples_verification: usize,
    pub integrator: Integrator,
    pub quadrature_grid: usize,
    pub rng: RngKind,
    pub seed: u64,
    pub verification_seed: u64,
    pub crn: bool,
    pub optimizer: Optimizer,
    pub pattern_spacing: f64,
    pub pattern_budget_search: i32,
    pub pattern_budget_verification: i32,
    pub dampening: DampeningMode,
    pub dampening_wmin: f64,
    pub dampening_wmax: f64,
    /// Arctan steepness; 0 selects `1 / (2 · target_epsilon)`.
    pub dampening_c: f64,
    pub dampening_fixed: f64,
    pub max_inner_iterations: usize,
    pub max_outer_passes: usize,
    pub resume_iterations: usize,
    pub workers: usize,
    pub bid_ceiling_factor: f64,
    pub verification_method: VerificationMethod,
    pub verify_fixed_truthful: bool,
}

impl RunConfig {
    pub fn defaults(domain: DomainKind, mechanism: MechanismKey) -> Result<Self> {
        let (grid_inner, grid_outer, grid_verification, samples_search, samples_verification, bs, bv, integrator) =
            match (domain, mechanism) {
                (DomainKind::Llg { .. }, MechanismKey::Llg(rule)) => {
                    let integrator =
                        if rule == LlgRule::FirstPrice { Integrator::Mc } else { Integrator::McImportance };
                    (40, 64, 8192, 10_000, 20_000, 12, 20, integrator)
                }
                (DomainKind::Llllgg, MechanismKey::Llllgg(_)) => (15, 20, 25, 20_000, 40_000, 8, 12, Integrator::Mc),
                (d, m) => return Err(Error::Config(format!("mechanism {m} does not belong to domain {d:?}"))),
            };
        let control_points = match domain {
            DomainKind::Llg { .. } => ControlPointMode::Adaptive,
            DomainKind::Llllgg | DomainKind::SingleGood => ControlPointMode::Even,
        };
        Ok(RunConfig {
            domain,
            mechanism,
            target_epsilon: match domain {
                DomainKind::Llg { .. } => 1e-3,
                DomainKind::Llllgg | DomainKind::SingleGood => 1e-2,
            },
            inner_gate: 0.8,
            control_points,
            grid_initial: 10,
            grid_inner,
            grid_outer,
            grid_verification,
            grid_min_interval: 0.0,
            samples_search,
            samples_verification,
            integrator,
            quadrature_grid: 512,
            rng: RngKind::Sobol,
            seed: 1,
            verification_seed: 2,
            crn: true,
            optimizer: Optimizer::Pattern,
            pattern_spacing: 0.1,
            pattern_budget_search: bs,
            pattern_budget_verification: bv,
            dampening: DampeningMode::Adaptive,
            dampening_wmin: 0.2,
            dampening_wmax: 0.7,
            dampening_c: 0.0,
            dampening_fixed: 0.5,
            max_inner_iterations: 100,
            max_outer_passes: 20,
            resume_iterations: 2,
            workers: 1,
            bid_ceiling_factor: 2.0,
            verification_method: VerificationMethod::Auto,
            verify_fixed_truthful: false,
        })
    }

    /// LLG defaults for the given prior and rule.
    pub fn llg(alpha: f64, gamma: f64, rule: LlgRule) -> Self {
        RunConfig::defaults(DomainKind::Llg { alpha, gamma }, MechanismKey::Llg(rule)).expect("matching domain")
    }

    /// Resolves `pairs` (later pairs win) on top of the defaults.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in pairs {
            map.insert(k, v);
        }
        let implied = map.get("mechanism").and_then(|m| m.split_once('.')).map_or("llg", |(d, _)| d);
        let domain = match map.remove("domain").unwrap_or(implied) {
            "llg" => {
                let alpha = parse_num(map.remove("llg.alpha").unwrap_or("1"), "llg.alpha")?;
                let gamma = parse_num(map.remove("llg.gamma").unwrap_or("0"), "llg.gamma")?;
                DomainKind::Llg { alpha, gamma }
            }
            "llllgg" => DomainKind::Llllgg,
            other => return Err(Error::Config(format!("unknown domain `{other}`"))),
        };
        let default_mech = match domain {
            DomainKind::Llg { .. } => "llg.vcg_nearest",
            DomainKind::Llllgg | DomainKind::SingleGood => "llllgg.first_price",
        };
        let mechanism: MechanismKey = map.remove("mechanism").unwrap_or(default_mech).parse()?;
        let mut cfg = RunConfig::defaults(domain, mechanism)?;
        for (k, v) in map {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file: `key = value` lines, `#` comments, blank lines.
    pub fn parse(text: &str) -> Result<Self> {
        RunConfig::from_pairs(parse_pairs(text)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "target_epsilon" => self.target_epsilon = parse_num(value, key)?,
            "inner_gate" => self.inner_gate = parse_num(value, key)?,
            "control_points" => self.control_points = parse_enum(value, key)?,
            "grid.initial" => self.grid_initial = parse_num(value, key)?,
            "grid.inner" => self.grid_inner = parse_num(value, key)?,
            "grid.outer" => self.grid_outer = parse_num(value, key)?,
            "grid.verification" => self.grid_verification = parse_num(value, key)?,
            "grid.min_interval" => self.grid_min_interval = parse_num(value, key)?,
            "samples.search" => self.samples_search = parse_num(value, key)?,
            "samples.verification" => self.samples_verification = parse_num(value, key)?,
            "integrator" => self.integrator = value.parse()?,
            "quadrature.grid" => self.quadrature_grid = parse_num(value, key)?,
            "rng" => self.rng = value.parse()?,
            "seed" => self.seed = parse_num(value, key)?,
            "verification.seed" => self.verification_seed = parse_num(value, key)?,
            "crn" => self.crn = parse_num(value, key)?,
            "optimizer" => self.optimizer = parse_enum(value, key)?,
            "pattern.spacing" => self.pattern_spacing = parse_num(value, key)?,
            "pattern.budget.search" => self.pattern_budget_search = parse_num(value, key)?,
            "pattern.budget.verification" => self.pattern_budget_verification = parse_num(value, key)?,
            "dampening" => self.dampening = parse_enum(value, key)?,
            "dampening.wmin" => self.dampening_wmin = parse_num(value, key)?,
            "dampening.wmax" => self.dampening_wmax = parse_num(value, key)?,
            "dampening.c" => self.dampening_c = parse_num(value, key)?,
            "dampening.fixed" => self.dampening_fixed = parse_num(value, key)?,
            "max_inner_iterations" => self.max_inner_iterations = parse_num(value, key)?,
            "max_outer_passes" => self.max_outer_passes = parse_num(value, key)?,
            "resume_iterations" => self.resume_iterations = parse_num(value, key)?,
            "workers" => self.workers = parse_num(value, key)?,
            "bid_ceiling_factor" => self.bid_ceiling_factor = parse_num(value, key)?,
            "verification.method" => self.verification_method = parse_enum(value, key)?,
            "verification.include_fixed" => self.verify_fixed_truthful = parse_num(value, key)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.target_epsilon > 0.0) {
            return fail("target_epsilon must be positive");
        }
        if !(self.inner_gate > 0.0 && self.inner_gate <= 1.0) {
            return fail("inner_gate must lie in (0, 1]");
        }
        if self.samples_search == 0 || self.samples_verification == 0 {
            return fail("sample counts must be positive");
        }
        if self.grid_outer < 2 || self.grid_verification < 2 || self.grid_inner < 2 {
            return fail("grids need at least two points per axis");
        }
        if self.control_points == ControlPointMode::Adaptive && self.grid_initial < 2 {
            return fail("grid.initial must be at least 2");
        }
        if self.control_points == ControlPointMode::Adaptive && self.grid_inner < self.grid_initial {
            return fail("grid.inner must be at least grid.initial for adaptive placement");
        }
        if !(0.0 <= self.dampening_wmin && self.dampening_wmin < self.dampening_wmax && self.dampening_wmax <= 1.0) {
            return fail("dampening weights need 0 <= wmin < wmax <= 1");
        }
        if !(0.0..=1.0).contains(&self.dampening_fixed) {
            return fail("dampening.fixed must lie in [0, 1]");
        }
        if self.pattern_budget_search < 1 || self.pattern_budget_verification < 1 || !(self.pattern_spacing > 0.0) {
            return fail("pattern budgets must be at least 1 and spacing positive");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if !(self.bid_ceiling_factor > 0.0) {
            return fail("bid_ceiling_factor must be positive");
        }
        Ok(())
    }

    /// Arctan steepness actually used by adaptive dampening.
    pub fn dampening_steepness(&self) -> f64 {
        if self.dampening_c > 0.0 {
            self.dampening_c
        } else {
            1.0 / (2.0 * self.target_epsilon)
        }
    }

    /// The `domain`, prior and `mechanism` keys describing a setting.
    pub fn setting_pairs(domain: DomainKind, mechanism: MechanismKey) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match domain {
            DomainKind::Llg { alpha, gamma } => {
                out.push(("domain".into(), "llg".into()));
                out.push(("llg.alpha".into(), alpha.to_string()));
                out.push(("llg.gamma".into(), gamma.to_string()));
            }
            DomainKind::Llllgg => out.push(("domain".into(), "llllgg".into())),
            DomainKind::SingleGood => out.push(("domain".into(), "single_good".into())),
        }
        out.push(("mechanism".into(), mechanism.to_string()));
        out
    }

    /// Every key with its resolved value, one per line.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match self.domain {
            DomainKind::Llg { alpha, gamma } => {
                line("domain", "llg".into());
                line("llg.alpha", alpha.to_string());
                line("llg.gamma", gamma.to_string());
            }
            DomainKind::Llllgg => line("domain", "llllgg".into()),
            DomainKind::SingleGood => line("domain", "single_good".into()),
        }
        line("mechanism", self.mechanism.to_string());
        line("target_epsilon", self.target_epsilon.to_string());
        line("inner_gate", self.inner_gate.to_string());
        line("control_points", enum_name(&self.control_points));
        line("grid.initial", self.grid_initial.to_string());
        line("grid.inner", self.grid_inner.to_string());
        line("grid.outer", self.grid_outer.to_string());
        line("grid.verification", self.grid_verification.to_string());
        line("grid.min_interval", self.grid_min_interval.to_string());
        line("samples.search", self.samples_search.to_string());
        line("samples.verification", self.samples_verification.to_string());
        line("integrator", self.integrator.name().into());
        line("quadrature.grid", self.quadrature_grid.to_string());
        line("rng", enum_name(&self.rng));
        line("seed", self.seed.to_string());
        line("verification.seed", self.verification_seed.to_string());
        line("crn", self.crn.to_string());
        line("optimizer", enum_name(&self.optimizer));
        line("pattern.spacing", self.pattern_spacing.to_string());
        line("pattern.budget.search", self.pattern_budget_search.to_string());
        line("pattern.budget.verification", self.pattern_budget_verification.to_string());
        line("dampening", enum_name(&self.dampening));
        line("dampening.wmin", self.dampening_wmin.to_string());
        line("dampening.wmax", self.dampening_wmax.to_string());
        line("dampening.c", self.dampening_c.to_string());
        line("dampening.fixed", self.dampening_fixed.to_string());
        line("max_inner_iterations", self.max_inner_iterations.to_string());
        line("max_outer_passes", self.max_outer_passes.to_string());
        line("resume_iterations", self.resume_iterations.to_string());
        line("workers", self.workers.to_string());
        line("bid_ceiling_factor", self.bid_ceiling_factor.to_string());
        line("verification.method", enum_name(&self.verification_method));
        line("verification.include_fixed", self.verify_fixed_truthful.to_string());
        out
    }

    /// The manifest without keys that cannot influence results.
    pub fn result_manifest(&self) -> String {
        self.to_manifest().lines().filter(|l| !l.starts_with("workers ")).map(|l| format!("{l}\n")).collect()
    }
}

pub fn parse_pairs(text: &str) -> Result<Vec<(&str, &str)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
        out.push((k.trim(), v.trim()));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(value: &str, key: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_enum<T: for<'de> Deserialize<'de>>(value: &str, key: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enums serialize to strings"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let cfg = RunConfig::parse(
            "domain = llg\nllg.alpha = 2\nllg.gamma = 0.5\nmechanism = llg.proxy # comment\nseed = 9\ncrn = false\n",
        )
        .unwrap();
        assert_eq!(cfg.domain, DomainKind::Llg { alpha: 2.0, gamma: 0.5 });
        assert_eq!(cfg.integrator, Integrator::McImportance);
        assert_eq!(cfg.seed, 9);
        assert!(!cfg.crn);
        assert_eq!(RunConfig::parse(&cfg.to_manifest()).unwrap(), cfg);
    }

    #[test]
    fn domain_defaults() {
        let cfg = RunConfig::parse("domain = llllgg").unwrap();
        assert_eq!((cfg.grid_inner, cfg.grid_outer, cfg.grid_verification), (15, 20, 25));
        assert_eq!((cfg.samples_search, cfg.samples_verification), (20_000, 40_000));
        assert_eq!((cfg.pattern_budget_search, cfg.pattern_budget_verification), (8, 12));
        let fp = RunConfig::parse("mechanism = llg.first_price").unwrap();
        assert_eq!(fp.integrator, Integrator::Mc);
        assert_eq!(fp.dampening_steepness(), 500.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("unknown = 1").is_err());
        assert!(RunConfig::parse("domain = llg\nmechanism = llllgg.first_price").is_err());
        assert_eq!(RunConfig::parse("mechanism = llllgg.first_price").unwrap().domain, DomainKind::Llllgg);
        assert!(RunConfig::parse("seed = x").is_err());
        assert!(RunConfig::parse("dampening.wmin = 0.9").is_err());
        assert!(RunConfig::parse("no equals sign").is_err());
    }
}
