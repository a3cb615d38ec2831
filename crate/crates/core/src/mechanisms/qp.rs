//! Primal active-set solver for Euclidean projections onto small polytopes.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when the matrix is numerically singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear constraints `rows[k] · x (= or >=) rhs[k]`.
#[derive(Debug, Clone, Default)]
pub struct Constraints {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl Constraints {
    pub fn push(&mut self, row: Vec<f64>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Minimizes `½‖x − target‖²` subject to `equalities` and `inequalities`
/// (rows `g·x >= h`), starting from the feasible point `start`.
pub fn project(
    target: &[f64],
    equalities: &Constraints,
    inequalities: &Constraints,
    start: &[f64],
) -> Result<Vec<f64>> {
    let n = target.len();
    let mut x = start.to_vec();
    let mut working: Vec<usize> = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        let active: Vec<&[f64]> = equalities
            .rows
            .iter()
            .map(Vec::as_slice)
            .chain(working.iter().map(|&k| inequalities.rows[k].as_slice()))
            .collect();
        let grad: Vec<f64> = x.iter().zip(target).map(|(a, t)| a - t).collect();
        // Multipliers of the active set: (A Aᵀ) λ = A grad.
        let lambda = if active.is_empty() {
            Vec::new()
        } else {
            let gram = active.iter().map(|r| active.iter().map(|s| dot(r, s)).collect()).collect();
            let rhs = active.iter().map(|r| dot(r, &grad)).collect();
            solve_dense(gram, rhs)
                .ok_or_else(|| Error::PaymentSolver("degenerate working set in projection".into()))?
        };
        let mut d = grad.clone();
        for (row, l) in active.iter().zip(&lambda) {
            for (dk, rk) in d.iter_mut().zip(row.iter()) {
                *dk -= l * rk;
            }
        }
        for dk in d.iter_mut() {
            *dk = -*dk;
        }
        let d_norm = dot(&d, &d).sqrt();
        if d_norm <= 1e-13 * (1.0 + dot(&x, &x).sqrt()) {
            let neq = equalities.len();
            let most_negative = working
                .iter()
                .enumerate()
                .map(|(w, _)| (w, lambda[neq + w]))
                .filter(|&(_, l)| l < -1e-12)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match most_negative {
                Some((w, _)) => {
                    working.remove(w);
                    continue;
                }
                None => return Ok(x),
            }
        }
        let mut step = 1.0;
        let mut blocking = None;
        for k in 0..inequalities.len() {
            if working.contains(&k) {
                continue;
            }
            let gd = dot(&inequalities.rows[k], &d);
            if gd < -1e-14 * d_norm {
                let slack = (inequalities.rhs[k] - dot(&inequalities.rows[k], &x)).min(0.0);
                let t = slack / gd;
                if t < step {
                    step = t;
                    blocking = Some(k);
                }
            }
        }
        for i in 0..n {
            x[i] += step * d[i];
        }
        if let Some(k) = blocking {
            working.push(k);
        }
    }
    Err(Error::PaymentSolver("active-set projection did not converge".into()))
}
