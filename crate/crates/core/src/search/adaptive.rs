//! Adaptive placement of one-dimensional control points.
//!
//! Starting from an even grid, points are inserted one at a time next to the
//! point where the best response bends most, halving the larger of its two
//! adjacent intervals.

use crate::error::{Error, Result};

/// A control point with its best-response bid and the incumbent's utility loss there.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivePoint {
    pub v: f64,
    pub bid: Vec<f64>,
    pub loss: f64,
}

/// Absolute change of slope at `v`, maximized over bid components.
///
/// Boundary points and points with an adjacent interval of at most
/// `min_interval` get priority 0.
pub fn curvature_priority(
    v: f64,
    bid: &[f64],
    lower: Option<(f64, &[f64])>,
    upper: Option<(f64, &[f64])>,
    min_interval: f64,
) -> f64 {
    let (Some((vl, bl)), Some((vu, bu))) = (lower, upper) else {
        return 0.0;
    };
    if v - vl <= min_interval || vu - v <= min_interval {
        return 0.0;
    }
    bid.iter()
        .zip(bl)
        .zip(bu)
        .map(|((&b, &l), &u)| ((u - b) / (vu - v) - (b - l) / (v - vl)).abs())
        .fold(0.0, f64::max)
}

/// Places `max_points` control points on `[lo, hi]`.
///
/// `evaluate` receives `(index, v)` pairs and returns `(bid, loss)` for each, in
/// order. Indices are stable: the initial points are `0..initial_points` and
/// the `j`-th insertion is `initial_points + j`. The initial points arrive in
/// one batch so callers can evaluate them in parallel.
pub fn adaptive_best_response(
    lo: f64,
    hi: f64,
    initial_points: usize,
    max_points: usize,
    min_interval: f64,
    mut evaluate: impl FnMut(&[(usize, f64)]) -> Result<Vec<(Vec<f64>, f64)>>,
) -> Result<Vec<AdaptivePoint>> {
    if initial_points < 2 || max_points < initial_points || !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "adaptive grid needs 2 <= initial ({initial_points}) <= max ({max_points}) and lo < hi"
        )));
    }
    let step = (hi - lo) / (initial_points - 1) as f64;
    let initial: Vec<(usize, f64)> = (0..initial_points)
        .map(|k| (k, if k + 1 == initial_points { hi } else { lo + step * k as f64 }))
        .collect();
    let results = evaluate(&initial)?;
    if results.len() != initial.len() {
        return Err(Error::InvalidArgument("evaluator returned the wrong number of results".into()));
    }
    let mut points: Vec<AdaptivePoint> =
        initial.iter().zip(results).map(|(&(_, v), (bid, loss))| AdaptivePoint { v, bid, loss }).collect();

    while points.len() < max_points {
        let n = points.len();
        let mut chosen = 0;
        let mut chosen_key = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for k in 0..n {
            let lower = (k > 0).then(|| (points[k - 1].v, points[k - 1].bid.as_slice()));
            let upper = (k + 1 < n).then(|| (points[k + 1].v, points[k + 1].bid.as_slice()));
            let p = curvature_priority(points[k].v, &points[k].bid, lower, upper, min_interval);
            let width = lower.map_or(0.0, |(vl, _)| points[k].v - vl).max(upper.map_or(0.0, |(vu, _)| vu - points[k].v));
            // Strict comparison keeps the lowest v among ties.
            if (p, width) > chosen_key {
                chosen_key = (p, width);
                chosen = k;
            }
        }
        let k = chosen;
        let below = (k > 0).then(|| points[k].v - points[k - 1].v);
        let above = (k + 1 < n).then(|| points[k + 1].v - points[k].v);
        let go_up = match (below, above) {
            (None, _) => true,
            (_, None) => false,
            (Some(b), Some(a)) if a != b => a > b,
            _ => {
                let diff = |j: usize| {
                    points[j].bid.iter().zip(&points[k].bid).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
                };
                diff(k + 1) > diff(k - 1)
            }
        };
        let (left, right) = if go_up { (k, k + 1) } else { (k - 1, k) };
        let v = 0.5 * (points[left].v + points[right].v);
        if !(points[left].v < v && v < points[right].v) {
            return Err(Error::InvalidArgument(format!("control points too dense to split near {v}")));
        }
        let mut r = evaluate(&[(n, v)])?;
        let (bid, loss) = r.pop().ok_or_else(|| Error::InvalidArgument("evaluator returned no result".into()))?;
        points.insert(right, AdaptivePoint { v, bid, loss });
    }
    Ok(points)
}
