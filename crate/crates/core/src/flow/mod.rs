//! Area-preserving integration of Hamiltonian flows on charts.
//!
//! The vector field is `X_H = (∂H/∂y, -∂H/∂x)` (in annulus coordinates
//! `θ' = ∂H/∂h`, `h' = -∂H/∂θ`), so `H = h` drifts in `θ` at unit speed and
//! the flux through a cut from `a` to `b` is `H(a) - H(b)`.

mod energy;
mod flux;
mod transport;
mod winding;

use alloc::vec::Vec;

pub use energy::hofer_energy;
pub use flux::flux_through_cut;
pub use transport::{
    flow_images, transport_reports, verify_transport, TransportOptions, TransportReport,
};
pub use winding::{trajectory_class, WindingVector, WINDING_RESIDUAL};

use crate::geometry::{Grid, Point, ScalarField};
use crate::math::{floor, hypot};
use crate::{Error, Result};

/// Hamiltonian vector field of the interpolated `h` at `p`.
pub fn vector_field_at(h: &ScalarField, p: Point, t: f64) -> Result<[f64; 2]> {
    let g = h
        .gradient(p, t)
        .ok_or(Error::OutsideChart { x: p[0], y: p[1] })?;
    Ok([g[1], -g[0]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Largest time step; `None` means `10⁻³ |T|`.
    pub step: Option<f64>,
    /// Steps are also limited so that no step moves more than this fraction
    /// of a grid cell.
    pub cell_fraction: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Use a classical Runge-Kutta step when the midpoint iteration stalls.
    pub fallback: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            step: None,
            cell_fraction: 0.5,
            max_iterations: 20,
            tolerance: 1e-12,
            fallback: true,
        }
    }
}

impl IntegratorOptions {
    pub fn with_step(step: f64) -> Self {
        Self {
            step: Some(step),
            ..Self::default()
        }
    }
}

/// Sampled particle path. On the annulus `θ` is unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    /// Steps taken by the Runge-Kutta fallback.
    pub fallback_steps: usize,
}

impl Trajectory {
    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().unwrap()
    }
}

/// Counters of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowStats {
    pub steps: usize,
    pub fallback_steps: usize,
}

/// Fraction of a cell within which a point counts as lying on a cell edge.
const EDGE: f64 = 1e-7;

/// Times a stalled midpoint step is halved before the fallback is used.
const HALVINGS: usize = 3;

struct Stepper<'a> {
    h: &'a ScalarField,
    opts: IntegratorOptions,
    cell: f64,
}

impl<'a> Stepper<'a> {
    fn new(h: &'a ScalarField, opts: IntegratorOptions) -> Self {
        let g = h.grid();
        Self {
            h,
            opts,
            cell: g.dx().min(g.dy()),
        }
    }

    /// Cell coordinates of `x`, and the cell it lies in or is entering
    /// when moving with velocity `v`.
    fn cell_of(&self, x: Point, v: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let g = self.h.grid();
        let u = [(x[0] - g.x0) / g.dx(), (x[1] - g.y0) / g.dy()];
        let mut cell = [0.0; 2];
        for k in 0..2 {
            let near = libm::round(u[k]);
            cell[k] = if (u[k] - near).abs() < EDGE {
                if v[k] < 0.0 {
                    near - 1.0
                } else {
                    near
                }
            } else {
                floor(u[k])
            };
        }
        (u, cell)
    }

    /// Time for `x` moving with velocity `v` to leave its cell.
    fn exit_time(&self, x: Point, v: [f64; 2]) -> f64 {
        let (u, cell) = self.cell_of(x, v);
        let g = self.h.grid();
        let mut best = f64::INFINITY;
        for (k, size) in [(0, g.dx()), (1, g.dy())] {
            if v[k] != 0.0 {
                let d = if v[k] > 0.0 {
                    cell[k] + 1.0 - u[k]
                } else {
                    u[k] - cell[k]
                };
                best = best.min(d * size / v[k].abs());
            }
        }
        best
    }

    /// Fraction of the step from `x` to `y` that stays in the cell of `x`.
    fn inside_fraction(&self, x: Point, y: Point, v: [f64; 2]) -> f64 {
        let (u, cell) = self.cell_of(x, v);
        let g = self.h.grid();
        let w = [(y[0] - g.x0) / g.dx(), (y[1] - g.y0) / g.dy()];
        let mut s: f64 = 1.0;
        for k in 0..2 {
            let (lo, hi) = (cell[k] - EDGE, cell[k] + 1.0 + EDGE);
            if w[k] > hi {
                s = s.min((cell[k] + 1.0 - u[k]) / (w[k] - u[k]));
            } else if w[k] < lo {
                s = s.min((u[k] - cell[k]) / (u[k] - w[k]));
            }
        }
        s
    }

    fn v(&self, p: Point, t: f64) -> Result<[f64; 2]> {
        vector_field_at(self.h, p, t)
    }

    fn rk4(&self, x: Point, t: f64, dt: f64) -> Result<Point> {
        let k1 = self.v(x, t)?;
        let k2 = self.v(
            [x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]],
            t + 0.5 * dt,
        )?;
        let k3 = self.v(
            [x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]],
            t + 0.5 * dt,
        )?;
        let k4 = self.v([x[0] + dt * k3[0], x[1] + dt * k3[1]], t + dt)?;
        Ok([
            x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ])
    }

    /// One implicit midpoint step, `None` when the iteration stalls.
    fn midpoint(&self, x: Point, t: f64, dt: f64, v0: [f64; 2]) -> Result<Option<Point>> {
        let tm = t + 0.5 * dt;
        let mut y = [x[0] + dt * v0[0], x[1] + dt * v0[1]];
        for _ in 0..self.opts.max_iterations {
            let v = self.v([0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])], tm)?;
            let z = [x[0] + dt * v[0], x[1] + dt * v[1]];
            let d = hypot(z[0] - y[0], z[1] - y[1]);
            y = z;
            if d <= self.opts.tolerance {
                return Ok(Some(y));
            }
        }
        Ok(None)
    }

    /// Midpoint step of at most `dt`, halved a few times when the iteration
    /// stalls; returns the point, the step taken and whether the fallback
    /// was used.
    fn step(&self, x: Point, t: f64, dt: f64, v0: [f64; 2]) -> Result<(Point, f64, bool)> {
        let mut h = dt;
        for _ in 0..=HALVINGS {
            if let Some(y) = self.midpoint(x, t, h, v0)? {
                return Ok((y, h, false));
            }
            h *= 0.5;
        }
        if self.opts.fallback {
            Ok((self.rk4(x, t, dt)?, dt, true))
        } else {
            Err(Error::NonConvergence { t })
        }
    }

    /// Flows `x` from `t0` for duration `dur` (negative flows backward),
    /// calling `visit` after every step.
    fn run(
        &self,
        mut x: Point,
        t0: f64,
        dur: f64,
        mut visit: impl FnMut(f64, Point),
    ) -> Result<(Point, FlowStats)> {
        let mut stats = FlowStats::default();
        if dur == 0.0 {
            return Ok((x, stats));
        }
        let dir = dur.signum();
        let max_step = self.opts.step.unwrap_or(1e-3 * dur.abs()).abs();
        if !(max_step > 0.0) {
            return Err(Error::OutOfRange("time step must be positive".into()));
        }
        let mut t = t0;
        let end = t0 + dur;
        let mut left = dur.abs();
        while left > 0.0 {
            let v0 = self.v(x, t)?;
            let speed = hypot(v0[0], v0[1]);
            let mut dt = max_step;
            if speed > 0.0 {
                dt = dt.min(self.opts.cell_fraction * self.cell / speed);
                dt = dt.min(self.exit_time(x, [dir * v0[0], dir * v0[1]]));
            }
            if dt >= left * (1.0 - 1e-12) {
                dt = left;
            }
            let vd = [dir * v0[0], dir * v0[1]];
            let (mut y, mut taken, mut fell_back) = self.step(x, t, dir * dt, v0)?;
            for _ in 0..8 {
                let f = self.inside_fraction(x, y, vd);
                if f >= 1.0 || f < 1e-3 {
                    break;
                }
                (y, taken, fell_back) = self.step(x, t, taken * f, v0)?;
            }
            dt = taken.abs();
            if !(y[0].is_finite() && y[1].is_finite()) || !self.h.grid().contains(y) {
                return Err(Error::OutsideChart { x: y[0], y: y[1] });
            }
            x = y;
            left -= dt;
            t = if left > 0.0 { t + dir * dt } else { end };
            stats.steps += 1;
            stats.fallback_steps += fell_back as usize;
            visit(t, x);
        }
        Ok((x, stats))
    }
}

/// Integrates the flow of `h` from `x0` over `[0, duration]` with the
/// implicit midpoint rule and records every step.
pub fn integrate_flow(
    h: &ScalarField,
    x0: Point,
    duration: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !h.grid().contains(x0) {
        return Err(Error::OutsideChart { x: x0[0], y: x0[1] });
    }
    let stepper = Stepper::new(h, *opts);
    let mut times = alloc::vec![0.0];
    let mut points = alloc::vec![x0];
    let (_, stats) = stepper.run(x0, 0.0, duration, |t, p| {
        times.push(t);
        points.push(p);
    })?;
    Ok(Trajectory {
        grid: *h.grid(),
        times,
        points,
        fallback_steps: stats.fallback_steps,
    })
}

/// Endpoint of the flow from `x0` at time `t0` after `duration`, without
/// recording the path.
pub fn flow_point(
    h: &ScalarField,
    x0: Point,
    t0: f64,
    duration: f64,
    opts: &IntegratorOptions,
) -> Result<(Point, FlowStats)> {
    if !h.grid().contains(x0) {
        return Err(Error::OutsideChart { x: x0[0], y: x0[1] });
    }
    Stepper::new(h, *opts).run(x0, t0, duration, |_, _| {})
}

/// Positions of `x0` at each of the increasing `times` (starting from 0).
pub fn flow_checkpoints(
    h: &ScalarField,
    x0: Point,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<(Vec<Point>, FlowStats)> {
    let stepper = Stepper::new(h, *opts);
    let mut out = Vec::with_capacity(times.len());
    let mut x = x0;
    let mut t = 0.0;
    let mut total = FlowStats::default();
    for &target in times {
        let (y, s) = stepper.run(x, t, target - t, |_, _| {})?;
        total.steps += s.steps;
        total.fallback_steps += s.fallback_steps;
        x = y;
        t = target;
        out.push(x);
    }
    Ok((out, total))
}
