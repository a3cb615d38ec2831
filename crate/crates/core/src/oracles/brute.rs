//! Brute-force reference implementations for small instances.
//!
//! These trade speed for directness: every feasible allocation is listed,
//! polytopes are searched vertex by vertex, and projections are found by
//! trying every candidate active set.

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::mechanisms::qp::solve_dense;
use crate::mechanisms::CoreConstraint;
use crate::model::{Allocation, Bid, Bundle};

const FEASIBILITY: f64 = 1e-9;

/// Welfare-maximizing allocation by nested enumeration of each bidder's
/// choices (nothing, then each atom in order). Ties keep the allocation found
/// first. `coalition` restricts which bidders may win.
pub fn brute_winner_determination(domain: &Domain, bids: &[Bid], coalition: u64) -> (f64, Allocation) {
    fn go(
        domain: &Domain,
        bids: &[Bid],
        coalition: u64,
        i: usize,
        taken: Bundle,
        welfare: f64,
        current: &mut Vec<Bundle>,
        best: &mut (f64, Vec<Bundle>),
    ) {
        if i == bids.len() {
            if welfare > best.0 {
                *best = (welfare, current.clone());
            }
            return;
        }
        current.push(Bundle::EMPTY);
        go(domain, bids, coalition, i + 1, taken, welfare, current, best);
        current.pop();
        if coalition >> i & 1 == 0 {
            return;
        }
        for (k, &atom) in domain.bidders[i].action_atoms.iter().enumerate() {
            if atom.intersects(taken) {
                continue;
            }
            current.push(atom);
            go(domain, bids, coalition, i + 1, taken.union(atom), welfare + bids[i].0[k], current, best);
            current.pop();
        }
    }
    let mut best = (0.0, vec![Bundle::EMPTY; bids.len()]);
    go(domain, bids, coalition, 0, Bundle::EMPTY, 0.0, &mut Vec::new(), &mut best);
    (best.0, Allocation { assignments: best.1 })
}

/// Core constraints for a winner set as `(row, rhs)` over winner positions,
/// plus `0 ≤ p ≤ bid`. Row `r · p ≥ rhs`.
fn polytope(winning_bids: &[f64], constraints: &[CoreConstraint]) -> Vec<(Vec<f64>, f64)> {
    let k = winning_bids.len();
    let mut rows: Vec<(Vec<f64>, f64)> = constraints
        .iter()
        .map(|c| ((0..k).map(|j| f64::from((c.members >> j & 1) as u8)).collect(), c.rhs))
        .collect();
    for (j, &b) in winning_bids.iter().enumerate() {
        let mut lo = vec![0.0; k];
        lo[j] = 1.0;
        rows.push((lo, 0.0));
        let mut hi = vec![0.0; k];
        hi[j] = -1.0;
        rows.push((hi, -b));
    }
    rows
}

fn feasible(rows: &[(Vec<f64>, f64)], p: &[f64], tol: f64) -> bool {
    rows.iter().all(|(r, h)| r.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() >= h - tol)
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::new(), &mut out);
    out
}

/// Minimum revenue over the core by enumerating polytope vertices.
pub fn brute_min_core_revenue(winning_bids: &[f64], constraints: &[CoreConstraint]) -> Result<(f64, Vec<f64>)> {
    let k = winning_bids.len();
    if k == 0 {
        return Ok((0.0, Vec::new()));
    }
    let rows = polytope(winning_bids, constraints);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for active in subsets(rows.len(), k) {
        let a: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = active.iter().map(|&i| rows[i].1).collect();
        let Some(p) = solve_dense(a, b) else { continue };
        if !feasible(&rows, &p, FEASIBILITY) {
            continue;
        }
        let revenue: f64 = p.iter().sum();
        if best.as_ref().is_none_or(|(r, _)| revenue < *r) {
            best = Some((revenue, p));
        }
    }
    best.ok_or_else(|| Error::PaymentSolver("core is empty".into()))
}

/// Point of the minimum-revenue core face closest to `target`, found by
/// projecting onto the affine hull of every candidate active set and keeping
/// the closest feasible projection.
pub fn brute_core_projection(winning_bids: &[f64], constraints: &[CoreConstraint], target: &[f64]) -> Result<Vec<f64>> {
    let k = winning_bids.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let (revenue, _) = brute_min_core_revenue(winning_bids, constraints)?;
    let rows = polytope(winning_bids, constraints);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for size in 0..k {
        for active in subsets(rows.len(), size) {
            let mut eq_rows = vec![vec![1.0; k]];
            let mut eq_rhs = vec![revenue];
            for &i in &active {
                eq_rows.push(rows[i].0.clone());
                eq_rhs.push(rows[i].1);
            }
            let Some(p) = project_affine(target, &eq_rows, &eq_rhs) else { continue };
            if !feasible(&rows, &p, 1e-7) {
                continue;
            }
            let d: f64 = p.iter().zip(target).map(|(x, t)| (x - t).powi(2)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, p));
            }
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::PaymentSolver("no feasible projection".into()))
}

/// Euclidean projection of `t` onto `{x : A x = b}`, or `None` when `A` is
/// rank deficient.
fn project_affine(t: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    // x = t − Aᵀ λ with (A Aᵀ) λ = A t − b.
    let m = a.len();
    let gram: Vec<Vec<f64>> =
        (0..m).map(|i| (0..m).map(|j| a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum()).collect()).collect();
    let resid: Vec<f64> = (0..m).map(|i| a[i].iter().zip(t).map(|(x, y)| x * y).sum::<f64>() - b[i]).collect();
    let lambda = solve_dense(gram, resid)?;
    Some((0..t.len()).map(|j| t[j] - (0..m).map(|i| a[i][j] * lambda[i]).sum::<f64>()).collect())
}

/// VCG-nearest LLG payments of the two locals found on a grid: the core is
/// sampled on a `steps × steps` lattice of `[0, b1] × [0, b2]`, the cheapest
/// points form the minimum-revenue face, and the one nearest VCG wins.
pub fn grid_llg_core_payments(b1: f64, b2: f64, b3: f64, steps: usize) -> [f64; 2] {
    let vcg = [(b3 - b2).max(0.0), (b3 - b1).max(0.0)];
    let mut kept = Vec::new();
    for i in 0..=steps {
        for j in 0..=steps {
            let p = [b1 * i as f64 / steps as f64, b2 * j as f64 / steps as f64];
            if p[0] >= vcg[0] && p[1] >= vcg[1] && p[0] + p[1] >= b3 {
                kept.push(p);
            }
        }
    }
    let min = kept.iter().map(|p| p[0] + p[1]).fold(f64::INFINITY, f64::min);
    let slack = (b1 + b2) / steps as f64 * 1.5;
    kept.into_iter()
        .filter(|p| p[0] + p[1] <= min + slack)
        .min_by(|a, b| {
            let d = |p: &[f64; 2]| (p[0] - vcg[0]).powi(2) + (p[1] - vcg[1]).powi(2);
            d(a).total_cmp(&d(b))
        })
        .unwrap_or(vcg)
}
