//! Minimum-revenue core payments and their projection toward VCG.

use super::lp::minimize_nonneg_cost;
use super::qp::{project, Constraints};
use crate::error::{Error, Result};

const GUARD: f64 = 1e-9;

/// Winners in `members` (bitmask over winner positions) must pay at least `rhs`
/// in total, or the coalition of those left out together with every loser
/// would block the outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreConstraint {
    pub members: u32,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorePoint {
    /// Payments per winner position.
    pub payments: Vec<f64>,
    pub vcg: Vec<f64>,
    pub revenue: f64,
}

/// One constraint per nonempty subset of winners. Coalition welfare is
/// monotone, so the binding blocking coalition for a subset always contains
/// every loser.
pub fn core_constraints(
    bidder_count: usize,
    winners: &[usize],
    winning_bids: &[f64],
    welfare: impl Fn(u64) -> f64,
) -> Vec<CoreConstraint> {
    let all = (1u64 << bidder_count) - 1;
    let winner_mask = winners.iter().fold(0u64, |m, &w| m | 1 << w);
    let losers = all & !winner_mask;
    let k = winners.len();
    (1u32..1 << k)
        .map(|members| {
            let mut coalition = losers;
            let mut outside_bids = 0.0;
            for (pos, &w) in winners.iter().enumerate() {
                if members >> pos & 1 == 0 {
                    coalition |= 1 << w;
                    outside_bids += winning_bids[pos];
                }
            }
            CoreConstraint { members, rhs: welfare(coalition) - outside_bids }
        })
        .collect()
}

fn vcg_from_singletons(k: usize, constraints: &[CoreConstraint]) -> Vec<f64> {
    let mut vcg = vec![0.0; k];
    for c in constraints {
        if c.members.count_ones() == 1 {
            vcg[c.members.trailing_zeros() as usize] = c.rhs.max(0.0);
        }
    }
    vcg
}

struct Shifted {
    vcg: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

/// Rewrites the core in coordinates `y = p − vcg`, keeping only coalition rows
/// that are not implied by `y >= 0`.
fn shift(winning_bids: &[f64], constraints: &[CoreConstraint]) -> Shifted {
    let k = winning_bids.len();
    let vcg = vcg_from_singletons(k, constraints);
    let upper: Vec<f64> = winning_bids.iter().zip(&vcg).map(|(b, v)| (b - v).max(0.0)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in constraints.iter().filter(|c| c.members.count_ones() >= 2) {
        let row: Vec<f64> = (0..k).map(|j| f64::from((c.members >> j & 1) as u8)).collect();
        let r = c.rhs - (0..k).filter(|&j| c.members >> j & 1 == 1).map(|j| vcg[j]).sum::<f64>();
        if r > 0.0 {
            rows.push(row);
            rhs.push(r);
        }
    }
    Shifted { vcg, upper, rows, rhs }
}

/// Minimum total payment over the core, with a point attaining it.
pub fn min_core_revenue(winning_bids: &[f64], constraints: &[CoreConstraint]) -> Result<(f64, Vec<f64>)> {
    let k = winning_bids.len();
    let s = shift(winning_bids, constraints);
    let mut g = s.rows.clone();
    let mut h = s.rhs.clone();
    for j in 0..k {
        let mut row = vec![0.0; k];
        row[j] = -1.0;
        g.push(row);
        h.push(-s.upper[j]);
    }
    let (value, y) = minimize_nonneg_cost(&vec![1.0; k], &g, &h)?;
    let p = y.iter().zip(&s.vcg).map(|(y, v)| y + v).collect();
    Ok((value + s.vcg.iter().sum::<f64>(), p))
}

/// Core point of minimum revenue closest to the VCG payments in Euclidean
/// distance. VCG payments are taken from the singleton constraints.
pub fn vcg_nearest_payments(winning_bids: &[f64], constraints: &[CoreConstraint]) -> Result<CorePoint> {
    let k = winning_bids.len();
    let s = shift(winning_bids, constraints);
    let vcg_sum: f64 = s.vcg.iter().sum();
    if s.rows.is_empty() {
        return Ok(CorePoint { payments: s.vcg.clone(), revenue: vcg_sum, vcg: s.vcg });
    }
    let mut g = s.rows.clone();
    let mut h = s.rhs.clone();
    for j in 0..k {
        let mut row = vec![0.0; k];
        row[j] = -1.0;
        g.push(row);
        h.push(-s.upper[j]);
    }
    let (extra, start) = minimize_nonneg_cost(&vec![1.0; k], &g, &h)?;

    let mut eq = Constraints::default();
    eq.push(vec![1.0; k], extra);
    let mut ineq = Constraints { rows: g, rhs: h };
    for j in 0..k {
        let mut row = vec![0.0; k];
        row[j] = 1.0;
        ineq.push(row, 0.0);
    }
    let y = project(&vec![0.0; k], &eq, &ineq, &start)?;

    let mut payments = Vec::with_capacity(k);
    for j in 0..k {
        let p = s.vcg[j] + y[j];
        if p < -GUARD || p > winning_bids[j] + GUARD {
            return Err(Error::PaymentSolver(format!(
                "payment {p} of winner {j} outside [0, {}]",
                winning_bids[j]
            )));
        }
        payments.push(p.clamp(0.0, winning_bids[j]));
    }
    for c in constraints {
        let paid: f64 = (0..k).filter(|&j| c.members >> j & 1 == 1).map(|j| payments[j]).sum();
        if paid < c.rhs - GUARD {
            return Err(Error::PaymentSolver(format!("core constraint {:#b} violated by {}", c.members, c.rhs - paid)));
        }
    }
    Ok(CorePoint { revenue: payments.iter().sum(), payments, vcg: s.vcg })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Welfare of LLG coalitions for bids (b1, b2, b3).
    fn llg_welfare(b: [f64; 3]) -> impl Fn(u64) -> f64 {
        move |c| {
            let has = |i: usize| c >> i & 1 == 1;
            let locals = if has(0) { b[0] } else { 0.0 } + if has(1) { b[1] } else { 0.0 };
            let global = if has(2) { b[2] } else { 0.0 };
            locals.max(global)
        }
    }

    #[test]
    fn llg_instance_matches_closed_form() {
        let b = [0.5, 0.6, 1.0];
        let cons = core_constraints(3, &[0, 1], &b[..2], llg_welfare(b));
        assert_eq!(cons.len(), 3);
        let pt = vcg_nearest_payments(&b[..2], &cons).unwrap();
        assert!((pt.vcg[0] - 0.4).abs() < 1e-12 && (pt.vcg[1] - 0.5).abs() < 1e-12);
        assert!((pt.payments[0] - 0.45).abs() < 1e-12 && (pt.payments[1] - 0.55).abs() < 1e-12);
        let (rev, _) = min_core_revenue(&b[..2], &cons).unwrap();
        assert!((rev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vcg_in_core_is_kept() {
        // Without a package bid the zero VCG payments are already in the core.
        let b = [0.5, 0.6, 0.0];
        let cons = core_constraints(3, &[0, 1], &b[..2], llg_welfare(b));
        let pt = vcg_nearest_payments(&b[..2], &cons).unwrap();
        assert_eq!(pt.payments, pt.vcg);
        assert_eq!(pt.revenue, 0.0);
    }
}
