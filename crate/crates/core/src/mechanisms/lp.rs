//! Dense simplex for the small revenue-minimization programs of core payments.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 10_000;

/// Minimizes `c·y` subject to `g y >= h` and `y >= 0`, for a nonnegative cost
/// vector `c`. Returns the optimal value and an optimal `y`.
///
/// Solves the dual `max h·λ, gᵀλ <= c, λ >= 0`, whose origin is feasible, with
/// Bland's rule; the primal solution is read off the dual's reduced costs.
pub fn minimize_nonneg_cost(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    let m = g.len();
    if h.len() != m || g.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("constraint matrix shape mismatch".into()));
    }
    if c.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument("cost vector must be nonnegative".into()));
    }
    let width = m + n + 1;
    let rhs = width - 1;
    let mut tab = vec![vec![0.0; width]; n];
    for (j, row) in tab.iter_mut().enumerate() {
        for i in 0..m {
            row[i] = g[i][j];
        }
        row[m + j] = 1.0;
        row[rhs] = c[j];
    }
    let mut obj = vec![0.0; width];
    for i in 0..m {
        obj[i] = -h[i];
    }
    let mut basis: Vec<usize> = (m..m + n).collect();

    for _ in 0..MAX_PIVOTS {
        let Some(col) = (0..rhs).find(|&k| obj[k] < -PIVOT_TOL) else {
            let y = (0..n).map(|j| obj[m + j].max(0.0)).collect();
            return Ok((obj[rhs], y));
        };
        let mut pivot: Option<(usize, f64)> = None;
        for r in 0..n {
            let a = tab[r][col];
            if a > PIVOT_TOL {
                let ratio = tab[r][rhs] / a;
                let better = match pivot {
                    None => true,
                    Some((pr, best)) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[r] < basis[pr]),
                };
                if better {
                    pivot = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = pivot else {
            return Err(Error::PaymentSolver("revenue program is infeasible".into()));
        };
        let p = tab[pr][col];
        for x in tab[pr].iter_mut() {
            *x /= p;
        }
        let prow = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r != pr && row[col] != 0.0 {
                let f = row[col];
                for (x, &q) in row.iter_mut().zip(&prow) {
                    *x -= f * q;
                }
            }
        }
        let f = obj[col];
        for (x, &q) in obj.iter_mut().zip(&prow) {
            *x -= f * q;
        }
        basis[pr] = col;
    }
    Err(Error::PaymentSolver("simplex pivot limit reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_variable_covering() {
        // min y1 + y2, y1 + y2 >= 1, y1 >= 0.3, -y2 >= -0.5
        let g = vec![vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, -1.0]];
        let h = vec![1.0, 0.3, -0.5];
        let (v, y) = minimize_nonneg_cost(&[1.0, 1.0], &g, &h).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(y[0] >= 0.3 - 1e-12 && y[1] <= 0.5 + 1e-12);
        assert!((y[0] + y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_is_reported() {
        // y >= 2 and -y >= -1
        let g = vec![vec![1.0], vec![-1.0]];
        assert!(minimize_nonneg_cost(&[1.0], &g, &[2.0, -1.0]).is_err());
    }

    #[test]
    fn no_constraints_gives_zero() {
        let (v, y) = minimize_nonneg_cost(&[1.0, 1.0, 1.0], &[], &[]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(y, vec![0.0; 3]);
    }
}
