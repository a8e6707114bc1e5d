use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{CellLoc, Grid, Point};
use crate::{Error, Result};

/// Time-dependent Hamiltonian sampled on a grid.
///
/// Space: bilinear interpolation per cell. Time: piecewise linear between
/// knots, held constant outside `[t_0, t_m]`. A single knot means the field
/// is autonomous.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    knots: Vec<f64>,
    layers: Vec<Vec<f64>>,
}

impl ScalarField {
    pub fn new(grid: Grid, knots: Vec<f64>, layers: Vec<Vec<f64>>) -> Result<Self> {
        if knots.is_empty() || knots.len() != layers.len() {
            return Err(Error::OutOfRange(format!(
                "{} time knots for {} layers",
                knots.len(),
                layers.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::OutOfRange("time knots must increase".into()));
        }
        let n = grid.len();
        for layer in &layers {
            if layer.len() != n {
                return Err(Error::OutOfRange(format!(
                    "layer has {} samples, grid needs {n}",
                    layer.len()
                )));
            }
            if let Some(k) = layer.iter().position(|v| !v.is_finite()) {
                let [x, y] = grid.node(k % grid.columns(), k / grid.columns());
                return Err(Error::NonFinite { x, y, t: 0.0 });
            }
        }
        Ok(Self {
            grid,
            knots,
            layers,
        })
    }

    pub fn autonomous(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        Self::new(grid, vec![0.0], vec![samples])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            knots: vec![0.0],
            layers: vec![vec![0.0; grid.len()]],
        }
    }

    /// Samples `f(x, y, t)` at every node and knot.
    pub fn from_fn<F>(grid: Grid, knots: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let mut layers = Vec::with_capacity(knots.len());
        for &t in knots {
            let mut layer = Vec::with_capacity(grid.len());
            for j in 0..grid.rows() {
                for i in 0..grid.columns() {
                    let [x, y] = grid.node(i, j);
                    let v = f(x, y, t);
                    if !v.is_finite() {
                        return Err(Error::NonFinite { x, y, t });
                    }
                    layer.push(v);
                }
            }
            layers.push(layer);
        }
        Self::new(grid, knots.to_vec(), layers)
    }

    pub fn from_fn_autonomous<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        Self::from_fn(grid, &[0.0], |x, y, _| f(x, y))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    pub fn is_autonomous(&self) -> bool {
        self.knots.len() == 1
    }

    /// Samples of an autonomous field (the first layer otherwise).
    pub fn samples(&self) -> &[f64] {
        &self.layers[0]
    }

    /// Pointwise transform of every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            knots: self.knots.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Layer weights `(k, lambda)` so that the field at `t` is
    /// `(1 - lambda) * layer[k] + lambda * layer[k + 1]`.
    fn time_weights(&self, t: f64) -> (usize, f64) {
        let m = self.knots.len();
        if m == 1 || t <= self.knots[0] {
            return (0, 0.0);
        }
        if t >= self.knots[m - 1] {
            return (m - 1, 0.0);
        }
        let k = self.knots.partition_point(|&s| s <= t) - 1;
        let lambda = (t - self.knots[k]) / (self.knots[k + 1] - self.knots[k]);
        (k, lambda)
    }

    #[inline]
    fn sample(&self, idx: usize, k: usize, lambda: f64) -> f64 {
        let a = self.layers[k][idx];
        if lambda == 0.0 {
            a
        } else {
            (1.0 - lambda) * a + lambda * self.layers[k + 1][idx]
        }
    }

    #[inline]
    fn corners(&self, c: &CellLoc, k: usize, lambda: f64) -> [f64; 4] {
        let g = &self.grid;
        [
            self.sample(g.index(c.i0, c.j0), k, lambda),
            self.sample(g.index(c.i1, c.j0), k, lambda),
            self.sample(g.index(c.i0, c.j0 + 1), k, lambda),
            self.sample(g.index(c.i1, c.j0 + 1), k, lambda),
        ]
    }

    /// Interpolated value; `None` outside the chart.
    pub fn value(&self, p: Point, t: f64) -> Option<f64> {
        let c = self.grid.locate(p)?;
        let (k, lambda) = self.time_weights(t);
        let [f00, f10, f01, f11] = self.corners(&c, k, lambda);
        let (a, b) = (c.fx, c.fy);
        Some((1.0 - a) * (1.0 - b) * f00 + a * (1.0 - b) * f10 + (1.0 - a) * b * f01 + a * b * f11)
    }

    /// Gradient `(dH/dx, dH/dy)` of the interpolant; `None` outside the chart.
    pub fn gradient(&self, p: Point, t: f64) -> Option<[f64; 2]> {
        let c = self.grid.locate(p)?;
        let (k, lambda) = self.time_weights(t);
        let [f00, f10, f01, f11] = self.corners(&c, k, lambda);
        let (a, b) = (c.fx, c.fy);
        let gx = ((1.0 - b) * (f10 - f00) + b * (f11 - f01)) / self.grid.dx();
        let gy = ((1.0 - a) * (f01 - f00) + a * (f11 - f10)) / self.grid.dy();
        Some([gx, gy])
    }

    /// Minimum and maximum of the interpolant at time `t` (attained at nodes).
    pub fn extrema_at(&self, t: f64) -> (f64, f64) {
        let (k, lambda) = self.time_weights(t);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for idx in 0..self.grid.len() {
            let v = self.sample(idx, k, lambda);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn oscillation_at(&self, t: f64) -> f64 {
        let (lo, hi) = self.extrema_at(t);
        hi - lo
    }

    /// Exact integral of the bilinear interpolant over the chart at time `t`.
    pub fn integral_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        let (k, lambda) = self.time_weights(t);
        let cols = g.columns();
        let cells_x = g.nx;
        let mut total = 0.0;
        for j in 0..g.ny {
            for i in 0..cells_x {
                let i1 = if g.periodic_x { (i + 1) % cols } else { i + 1 };
                total += self.sample(g.index(i, j), k, lambda)
                    + self.sample(g.index(i1, j), k, lambda)
                    + self.sample(g.index(i, j + 1), k, lambda)
                    + self.sample(g.index(i1, j + 1), k, lambda);
            }
        }
        0.25 * total * g.cell_area()
    }

    /// Largest gradient norm over all cells at time `t` (cell corners).
    pub fn max_speed_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        let (k, lambda) = self.time_weights(t);
        let cols = g.columns();
        let mut best: f64 = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let i1 = if g.periodic_x { (i + 1) % cols } else { i + 1 };
                let f00 = self.sample(g.index(i, j), k, lambda);
                let f10 = self.sample(g.index(i1, j), k, lambda);
                let f01 = self.sample(g.index(i, j + 1), k, lambda);
                let f11 = self.sample(g.index(i1, j + 1), k, lambda);
                let gx = (f10 - f00).abs().max((f11 - f01).abs()) / g.dx();
                let gy = (f01 - f00).abs().max((f11 - f10).abs()) / g.dy();
                best = best.max(crate::math::hypot(gx, gy));
            }
        }
        best
    }

    /// Largest gradient norm over all knots.
    pub fn max_speed(&self) -> f64 {
        self.knots
            .iter()
            .map(|&t| self.max_speed_at(t))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnnulusChart;

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let grid = AnnulusChart::with_resolution(16).grid();
        let f = ScalarField::from_fn_autonomous(grid, |_, h| 2.0 * h + 1.0).unwrap();
        let v = f.value([0.37, 0.41], 0.0).unwrap();
        assert!((v - 1.82).abs() < 1e-12);
        let g = f.gradient([0.37, 0.41], 0.0).unwrap();
        assert!(g[0].abs() < 1e-12 && (g[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_wraps() {
        let grid = AnnulusChart::with_resolution(8).grid();
        let f = ScalarField::from_fn_autonomous(grid, |x, _| x).unwrap();
        // between the last column (7/8) and column 0 the value runs 7/8 -> 0
        let v = f.value([15.0 / 16.0, 0.5], 0.0).unwrap();
        assert!((v - 7.0 / 16.0).abs() < 1e-12);
        assert_eq!(f.value([1.25, 0.5], 0.0), f.value([0.25, 0.5], 0.0));
    }

    #[test]
    fn time_interpolation_and_clamping() {
        let grid = AnnulusChart::with_resolution(4).grid();
        let f = ScalarField::from_fn(grid, &[0.0, 1.0], |_, _, t| 1.0 - t).unwrap();
        assert!((f.value([0.1, 0.5], 0.25).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(f.value([0.1, 0.5], 3.0), Some(0.0));
        assert!((f.oscillation_at(0.5)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let grid = AnnulusChart::with_resolution(4).grid();
        let err = ScalarField::from_fn_autonomous(grid, |_, h| 1.0 / (h - 0.5)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn integral_of_linear_field() {
        let grid = AnnulusChart::with_resolution(32).grid();
        let f = ScalarField::from_fn_autonomous(grid, |_, h| h).unwrap();
        assert!((f.integral_at(0.0) - 0.5).abs() < 1e-12);
    }
}
