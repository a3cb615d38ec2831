//! Strategy representations on control-point grids.
//!
//! Search uses piecewise-multilinear interpolation; verification uses
//! piecewise-constant strategies on the cell partition induced by a grid.
//! Every grid point is the lower corner of exactly one cell; cells whose lower
//! corner sits on the upper boundary of an axis are degenerate in that axis,
//! so the value space including its upper faces is covered exactly once and
//! a constant strategy returns the stored bid at every grid point.

mod file;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use file::{read_profile, write_profile, ProfileDocument, StrategyRecord};

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::model::{Bid, Role};

const COVERAGE_TOL: f64 = 1e-12;

/// Sorted control coordinates per value dimension (a tensor grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlGrid {
    axes: Vec<Vec<f64>>,
}

impl ControlGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one dimension".into()));
        }
        for (d, axis) in axes.iter().enumerate() {
            if axis.is_empty() || axis.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("axis {d} must hold finite coordinates")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("axis {d} is not strictly increasing")));
            }
        }
        Ok(ControlGrid { axes })
    }

    /// `count` evenly spaced coordinates per dimension, endpoints included.
    pub fn uniform(lo: &[f64], hi: &[f64], count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument("uniform grids need at least two points per axis".into()));
        }
        let axes = lo
            .iter()
            .zip(hi)
            .map(|(&a, &b)| {
                (0..count)
                    .map(|k| if k + 1 == count { b } else { a + (b - a) * k as f64 / (count - 1) as f64 })
                    .collect()
            })
            .collect();
        ControlGrid::new(axes)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a row-major flat index (last axis fastest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for d in (0..self.dims()).rev() {
            let n = self.axes[d].len();
            idx[d] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, axis)| acc * axis.len() + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, a)| a[i]).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    fn clamp_coordinate(&self, d: usize, x: f64) -> Result<f64> {
        let axis = &self.axes[d];
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        if !(x >= lo - COVERAGE_TOL && x <= hi + COVERAGE_TOL) {
            return Err(Error::OutOfCoverage { dim: d, value: x, lo, hi });
        }
        Ok(x.clamp(lo, hi))
    }

    /// Index of the largest coordinate not above `x` on axis `d`.
    fn lower_index(&self, d: usize, x: f64) -> usize {
        self.axes[d].partition_point(|&a| a <= x).saturating_sub(1)
    }

    /// Segment index and blend weight of `x` on axis `d`.
    fn segment(&self, d: usize, x: f64) -> (usize, f64) {
        let axis = &self.axes[d];
        if axis.len() == 1 {
            return (0, 0.0);
        }
        let k = self.lower_index(d, x).min(axis.len() - 2);
        let t = (x - axis[k]) / (axis[k + 1] - axis[k]);
        (k, t.clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationMode {
    Multilinear,
    ConstantLowerCorner,
}

/// Bids stored at the points of a control grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedStrategy {
    grid: ControlGrid,
    atoms: usize,
    /// Row-major `grid.len() × atoms`.
    bids: Vec<f64>,
    mode: InterpolationMode,
}

impl InterpolatedStrategy {
    pub fn new(grid: ControlGrid, atoms: usize, bids: Vec<f64>, mode: InterpolationMode) -> Result<Self> {
        if atoms == 0 || bids.len() != grid.len() * atoms {
            return Err(Error::InvalidArgument(format!(
                "expected {} bid entries for {} grid points and {atoms} atoms, got {}",
                grid.len() * atoms,
                grid.len(),
                bids.len()
            )));
        }
        if bids.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(Error::InvalidArgument("bids must be finite and nonnegative".into()));
        }
        Ok(InterpolatedStrategy { grid, atoms, bids, mode })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(
        grid: ControlGrid,
        atoms: usize,
        mode: InterpolationMode,
        mut f: impl FnMut(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut bids = Vec::with_capacity(grid.len() * atoms);
        for k in 0..grid.len() {
            bids.extend(f(&grid.point(k)));
        }
        InterpolatedStrategy::new(grid, atoms, bids, mode)
    }

    pub fn grid(&self) -> &ControlGrid {
        &self.grid
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn mode(&self) -> InterpolationMode {
        self.mode
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn bid_at(&self, flat: usize) -> &[f64] {
        &self.bids[flat * self.atoms..(flat + 1) * self.atoms]
    }

    pub fn evaluate(&self, v: &[f64]) -> Result<Bid> {
        let mut out = vec![0.0; self.atoms];
        self.evaluate_into(v, &mut out)?;
        Ok(Bid(out))
    }

    pub fn evaluate_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.grid.dims();
        if v.len() != d {
            return Err(Error::InvalidArgument(format!("valuation has {} entries, grid has {d} axes", v.len())));
        }
        let mut x = [0.0; 8];
        if d > x.len() {
            return Err(Error::Unsupported(format!("{d}-dimensional strategies")));
        }
        for k in 0..d {
            x[k] = self.grid.clamp_coordinate(k, v[k])?;
        }
        match self.mode {
            InterpolationMode::ConstantLowerCorner => {
                let mut flat = 0;
                for k in 0..d {
                    flat = flat * self.grid.axes[k].len() + self.grid.lower_index(k, x[k]);
                }
                out.copy_from_slice(self.bid_at(flat));
            }
            InterpolationMode::Multilinear => self.blend(&x[..d], out),
        }
        Ok(())
    }

    fn blend(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        let mut seg = [(0usize, 0.0f64); 8];
        for k in 0..d {
            seg[k] = self.grid.segment(k, x[k]);
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for corner in 0..1usize << d {
            let mut w = 1.0;
            let mut flat = 0;
            for k in 0..d {
                let (i, t) = seg[k];
                let up = corner >> (d - 1 - k) & 1 == 1;
                let n = self.grid.axes[k].len();
                w *= if up { t } else { 1.0 - t };
                flat = flat * n + if up { (i + 1).min(n - 1) } else { i };
            }
            if w != 0.0 {
                for (o, b) in out.iter_mut().zip(self.bid_at(flat)) {
                    *o += w * b;
                }
            }
        }
    }
}

/// A bidder's strategy: bid the values, or interpolate stored bids.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Truthful,
    Interpolated(InterpolatedStrategy),
}

impl Strategy {
    /// Bid at `v`; truthful bidding reports the valuation itself (one atom per
    /// bundle of interest).
    pub fn bid_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Strategy::Truthful => {
                out.copy_from_slice(v);
                Ok(())
            }
            Strategy::Interpolated(s) => s.evaluate_into(v, out),
        }
    }

    pub fn bid(&self, v: &[f64]) -> Result<Bid> {
        let mut out = vec![0.0; v.len()];
        if let Strategy::Interpolated(s) = self {
            out.resize(s.atoms(), 0.0);
        }
        self.bid_into(v, &mut out)?;
        Ok(Bid(out))
    }

    pub fn is_truthful(&self) -> bool {
        matches!(self, Strategy::Truthful)
    }
}

/// One strategy per bidder; bidders of a symmetric group share the same `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    strategies: Vec<Arc<Strategy>>,
}

impl Profile {
    pub fn new(strategies: Vec<Arc<Strategy>>) -> Self {
        Profile { strategies }
    }

    pub fn truthful(bidders: usize) -> Self {
        let s = Arc::new(Strategy::Truthful);
        Profile { strategies: vec![s; bidders] }
    }

    pub fn get(&self, bidder: usize) -> &Strategy {
        &self.strategies[bidder]
    }

    pub fn arc(&self, bidder: usize) -> &Arc<Strategy> {
        &self.strategies[bidder]
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    /// Replaces the strategy of every member of `members`.
    pub fn set_group(&mut self, members: &[usize], s: Arc<Strategy>) {
        for &m in members {
            self.strategies[m] = s.clone();
        }
    }

    /// Checks that fixed-truthful bidders bid truthfully and that strategy
    /// shapes fit the domain.
    pub fn check(&self, domain: &Domain) -> Result<()> {
        if self.len() != domain.bidder_count() {
            return Err(Error::InvalidArgument(format!(
                "profile has {} strategies for {} bidders",
                self.len(),
                domain.bidder_count()
            )));
        }
        for (i, b) in domain.bidders.iter().enumerate() {
            match self.get(i) {
                Strategy::Truthful => {}
                Strategy::Interpolated(s) => {
                    if b.role == Role::FixedTruthful {
                        return Err(Error::InvalidArgument(format!("bidder {i} must bid truthfully")));
                    }
                    if s.grid().dims() != b.value_dim() || s.atoms() != b.atom_count() {
                        return Err(Error::InvalidArgument(format!("strategy shape does not fit bidder {i}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A half-open box `[lower, upper)`; axes with `lower == upper` are the single
/// point `{lower}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Cell {
    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&lo, &hi))| if lo == hi { x == lo } else { x >= lo && x < hi })
    }

    /// The distinct corners of the box.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.lower.len();
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(1 << d);
        for corner in 0..1usize << d {
            let v: Vec<f64> = (0..d)
                .map(|k| if corner >> (d - 1 - k) & 1 == 1 { self.upper[k] } else { self.lower[k] })
                .collect();
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPartition {
    pub cells: Vec<Cell>,
}

impl CellPartition {
    /// Cell index holding `v`, if any.
    pub fn locate(&self, v: &[f64]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(v))
    }
}

/// One cell per grid point, in grid order, with that point as lower corner.
pub fn induced_partition(grid: &ControlGrid) -> Result<CellPartition> {
    if grid.axes().iter().any(|a| a.len() < 2) {
        return Err(Error::InvalidArgument("partition grids need two coordinates per axis".into()));
    }
    let cells = (0..grid.len())
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let lower: Vec<f64> = idx.iter().zip(grid.axes()).map(|(&i, a)| a[i]).collect();
            let upper = idx.iter().zip(grid.axes()).map(|(&i, a)| a[(i + 1).min(a.len() - 1)]).collect();
            Cell { lower, upper }
        })
        .collect();
    Ok(CellPartition { cells })
}

/// Samples `s` at every point of `grid` and returns the constant-lower-corner
/// strategy through those bids.
pub fn convert_to_piecewise_constant(s: &Strategy, atoms: usize, grid: &ControlGrid) -> Result<InterpolatedStrategy> {
    let mut bids = vec![0.0; grid.len() * atoms];
    for (k, chunk) in bids.chunks_exact_mut(atoms).enumerate() {
        s.bid_into(&grid.point(k), chunk)?;
    }
    InterpolatedStrategy::new(grid.clone(), atoms, bids, InterpolationMode::ConstantLowerCorner)
}
