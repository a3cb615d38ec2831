//! Closed-form LLG sample tables.

use super::estimator::{AuctionGame, Integrator, SampleTable, UtilityDecomposition};
use super::samplers::{LlgImportanceSampler, LlgSampler};
use super::stream::SampleStream;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::mechanisms::{llg_global_payment, llg_local_payment, LlgRule};
use crate::model::Role;
use crate::strategies::{Profile, Strategy};

/// Runs `$body` with `$r` bound to a constant copy of `$rule`, so the payment
/// rule is resolved outside the per-draw loop.
macro_rules! with_rule {
    ($rule:expr, $r:ident => $body:expr) => {
        match $rule {
            LlgRule::FirstPrice => {
                const $r: LlgRule = LlgRule::FirstPrice;
                $body
            }
            LlgRule::Vcg => {
                const $r: LlgRule = LlgRule::Vcg;
                $body
            }
            LlgRule::VcgNearest => {
                const $r: LlgRule = LlgRule::VcgNearest;
                $body
            }
            LlgRule::NearestBid => {
                const $r: LlgRule = LlgRule::NearestBid;
                $body
            }
            LlgRule::Proxy => {
                const $r: LlgRule = LlgRule::Proxy;
                $body
            }
            LlgRule::Proportional => {
                const $r: LlgRule = LlgRule::Proportional;
                $body
            }
        }
    };
}

pub struct LlgGame {
    domain: Domain,
    rule: LlgRule,
    sampler: LlgSampler,
    integrator: Integrator,
    quadrature_grid: usize,
}

impl LlgGame {
    /// The package bidder is fixed truthful under every rule except
    /// first-price, where it learns like the locals.
    pub fn new(alpha: f64, gamma: f64, rule: LlgRule, integrator: Integrator, quadrature_grid: usize) -> Result<Self> {
        let role = if rule.global_truthful() { Role::FixedTruthful } else { Role::Independent };
        if integrator == Integrator::McImportance && !rule.global_truthful() {
            return Err(Error::Unsupported("importance sampling needs a truthful package bidder".into()));
        }
        if integrator == Integrator::Quadrature && quadrature_grid == 0 {
            return Err(Error::InvalidArgument("quadrature grid must be positive".into()));
        }
        Ok(LlgGame {
            domain: Domain::llg(alpha, gamma, role)?,
            rule,
            sampler: LlgSampler::new(alpha, gamma)?,
            integrator,
            quadrature_grid,
        })
    }

    pub fn rule(&self) -> LlgRule {
        self.rule
    }

    /// Midpoint quadrature nodes over the mixture of the correlated and the
    /// independent prior component, as `(first, second, weight)`.
    ///
    /// With `own = Some(v)` (a local bidder) the nodes are the partner's value
    /// and the package value's quantile; with `None` (the package bidder) they
    /// are the two local values.
    fn nodes(&self, own: Option<f64>) -> Vec<(f64, f64, f64)> {
        let g = self.quadrature_grid;
        let gamma = self.sampler.gamma;
        let mid = |k: usize| (k as f64 + 0.5) / g as f64;
        let second = |c: usize| match own {
            Some(_) => mid(c),
            None => self.sampler.local_value(mid(c)),
        };
        let mut nodes = Vec::with_capacity(g * g + g);
        if gamma < 1.0 {
            let w = (1.0 - gamma) / (g * g) as f64;
            for a in 0..g {
                let x = self.sampler.local_value(mid(a));
                for c in 0..g {
                    nodes.push((x, second(c), w));
                }
            }
        }
        if gamma > 0.0 {
            let w = gamma / g as f64;
            for c in 0..g {
                nodes.push(match own {
                    Some(v) => (v, mid(c), w),
                    None => {
                        let x = self.sampler.local_value(mid(c));
                        (x, x, w)
                    }
                });
            }
        }
        nodes
    }
}

fn bid1(s: &Strategy, v: f64) -> Result<f64> {
    let mut out = [0.0];
    s.bid_into(&[v], &mut out)?;
    Ok(out[0])
}

fn decomposition(win: f64, pay: f64, n: usize) -> UtilityDecomposition {
    UtilityDecomposition { win_prob: vec![win], empty_prob: 1.0 - win, expected_payment: pay, n_samples: n }
}

impl AuctionGame for LlgGame {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn stream_dimension(&self, _bidder: usize) -> usize {
        3
    }

    fn sample_table(
        &self,
        bidder: usize,
        valuation: &[f64],
        profile: &Profile,
        stream: &SampleStream,
        n: usize,
    ) -> Result<Box<dyn SampleTable>> {
        if bidder > 2 || valuation.len() != 1 {
            return Err(Error::InvalidArgument(format!("LLG has no bidder {bidder} with that valuation")));
        }
        if self.integrator != Integrator::Quadrature && stream.dimension != 3 {
            return Err(Error::InvalidArgument(format!("LLG needs 3-dimensional streams, got {}", stream.dimension)));
        }
        let v = valuation[0];
        if bidder < 2 {
            let partner = profile.get(1 - bidder);
            let global = profile.get(2);
            match self.integrator {
                Integrator::Mc => {
                    let pts = stream.generate(n)?;
                    let mut rows = Vec::with_capacity(n);
                    for u in pts.chunks_exact(3) {
                        let vj = if self.sampler.correlated(u[0]) { v } else { self.sampler.local_value(u[1]) };
                        rows.push([bid1(partner, vj)?, bid1(global, 2.0 * u[2])?, 1.0]);
                    }
                    Ok(Box::new(LocalTable { rule: self.rule, rows, norm: 1.0 / n as f64 }))
                }
                Integrator::McImportance => {
                    if !global.is_truthful() {
                        return Err(Error::Unsupported("importance sampling needs a truthful package bidder".into()));
                    }
                    let pts = stream.generate(n)?;
                    let mut rows = Vec::with_capacity(n);
                    for u in pts.chunks_exact(3) {
                        let vj = if self.sampler.correlated(u[0]) { v } else { self.sampler.local_value(u[1]) };
                        rows.push([bid1(partner, vj)?, u[2]]);
                    }
                    Ok(Box::new(LocalImportanceTable { rule: self.rule, rows, norm: 1.0 / n as f64 }))
                }
                Integrator::Quadrature => {
                    let mut rows = Vec::new();
                    for (vj, u3, w) in self.nodes(Some(v)) {
                        rows.push([bid1(partner, vj)?, bid1(global, 2.0 * u3)?, w]);
                    }
                    Ok(Box::new(LocalTable { rule: self.rule, rows, norm: 1.0 }))
                }
            }
        } else {
            let (s1, s2) = (profile.get(0), profile.get(1));
            let mut rows = Vec::new();
            let norm = match self.integrator {
                Integrator::Quadrature => {
                    for (v1, v2, w) in self.nodes(None) {
                        rows.push([bid1(s1, v1)? + bid1(s2, v2)?, w]);
                    }
                    1.0
                }
                _ => {
                    let pts = stream.generate(n)?;
                    for u in pts.chunks_exact(3) {
                        let v1 = self.sampler.local_value(u[1]);
                        let v2 = if self.sampler.correlated(u[0]) { v1 } else { self.sampler.local_value(u[2]) };
                        rows.push([bid1(s1, v1)? + bid1(s2, v2)?, 1.0]);
                    }
                    1.0 / n as f64
                }
            };
            Ok(Box::new(GlobalTable { rule: self.rule, rows, norm }))
        }
    }
}

/// Local bidder: `(partner bid, package bid, weight)` per draw.
struct LocalTable {
    rule: LlgRule,
    rows: Vec<[f64; 3]>,
    norm: f64,
}

impl LocalTable {
    fn scale(&self) -> f64 {
        self.norm * self.rows.len() as f64
    }
}

impl SampleTable for LocalTable {
    fn atoms(&self) -> usize {
        1
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let b = bid[0];
        let (win, pay) = with_rule!(self.rule, RULE => {
            let mut win = 0.0;
            let mut pay = 0.0;
            for r in &self.rows {
                if b + r[0] >= r[1] {
                    win += r[2];
                    pay += r[2] * llg_local_payment(RULE, b, r[0], r[1]);
                }
            }
            (win, pay)
        });
        Ok(decomposition(win * self.norm, pay * self.norm, self.rows.len()))
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        let b = bid[0];
        let scale = self.scale();
        Ok(self
            .rows
            .iter()
            .map(|r| {
                if b + r[0] >= r[1] {
                    scale * r[2] * (atom_values[0] - llg_local_payment(self.rule, b, r[0], r[1]))
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Local bidder against a truthful package bidder whose value is drawn only
/// below the locals' combined bid: `(partner bid, uniform coordinate)`.
struct LocalImportanceTable {
    rule: LlgRule,
    rows: Vec<[f64; 2]>,
    norm: f64,
}

impl SampleTable for LocalImportanceTable {
    fn atoms(&self) -> usize {
        1
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let b = bid[0];
        let (win, pay) = with_rule!(self.rule, RULE => {
            let mut win = 0.0;
            let mut pay = 0.0;
            for r in &self.rows {
                let (v3, w) = LlgImportanceSampler::truncated_global(b, r[0], r[1]);
                win += w;
                pay += w * llg_local_payment(RULE, b, r[0], v3);
            }
            (win, pay)
        });
        Ok(decomposition(win * self.norm, pay * self.norm, self.rows.len()))
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        let b = bid[0];
        Ok(self
            .rows
            .iter()
            .map(|r| {
                let (v3, w) = LlgImportanceSampler::truncated_global(b, r[0], r[1]);
                w * (atom_values[0] - llg_local_payment(self.rule, b, r[0], v3))
            })
            .collect())
    }
}

/// Package bidder: `(sum of local bids, weight)` per draw.
struct GlobalTable {
    rule: LlgRule,
    rows: Vec<[f64; 2]>,
    norm: f64,
}

impl SampleTable for GlobalTable {
    fn atoms(&self) -> usize {
        1
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn evaluate(&self, bid: &[f64]) -> Result<UtilityDecomposition> {
        let b = bid[0];
        let mut win = 0.0;
        let mut pay = 0.0;
        for r in &self.rows {
            if b > r[0] {
                win += r[1];
                pay += r[1] * llg_global_payment(self.rule, r[0], 0.0, b);
            }
        }
        Ok(decomposition(win * self.norm, pay * self.norm, self.rows.len()))
    }

    fn sample_utilities(&self, bid: &[f64], atom_values: &[f64]) -> Result<Vec<f64>> {
        let b = bid[0];
        let scale = self.norm * self.rows.len() as f64;
        Ok(self
            .rows
            .iter()
            .map(|r| if b > r[0] { scale * r[1] * (atom_values[0] - llg_global_payment(self.rule, r[0], 0.0, b)) } else { 0.0 })
            .collect())
    }
}
