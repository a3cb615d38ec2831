//! Brent's method for one-dimensional maximization on an interval.

use crate::error::{Error, Result};
use crate::search::pattern::Optimum;

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Maximizes `f` on `[lo, hi]` to absolute tolerance `tol`.
///
/// `start` is evaluated first and returned if no visited point beats it.
pub fn brent_maximize<T: Clone>(
    lo: f64,
    hi: f64,
    start: f64,
    tol: f64,
    max_iterations: usize,
    mut f: impl FnMut(f64) -> Result<(f64, T)>,
) -> Result<Optimum<T>> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("brent needs lo < hi and tol > 0, got [{lo}, {hi}] tol {tol}")));
    }
    let start = start.clamp(lo, hi);
    let (start_u, start_payload) = f(start)?;
    let mut evaluations = 1;
    let mut best = (start, start_u, start_payload.clone());

    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let (fx0, px) = f(x)?;
    evaluations += 1;
    if fx0 > best.1 {
        best = (x, fx0, px);
    }
    // Minimize the negated objective.
    let (mut fx, mut fw, mut fv) = (-fx0, -fx0, -fx0);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..max_iterations {
        let m = 0.5 * (a + b);
        let tol1 = tol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let (fu_raw, pu) = f(u)?;
        evaluations += 1;
        if fu_raw > best.1 {
            best = (u, fu_raw, pu);
        }
        let fu = -fu_raw;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok(Optimum { bid: vec![best.0], utility: best.1, payload: best.2, evaluations, final_spacing: tol })
}
