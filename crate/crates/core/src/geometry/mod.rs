//! Surfaces, charts and sampled Hamiltonians.
//!
//! Everything lives on one of two chart types: the annulus `S^1 x (0, 1)`
//! with coordinates `(theta, h)` and area form `d theta ^ d h` (total area
//! 1), or a planar rectangle with `dx ^ dy`. Fields are sampled on a regular
//! grid and interpolated bilinearly in space and linearly in time.

mod expr;
mod field;
mod region;
mod sphere;
mod star;

use alloc::format;
use alloc::vec::Vec;

pub use expr::{parse_field_expression, Expression, SamplingOptions};
pub use field::ScalarField;
pub use region::{polygon_area, region_area, Region};
pub use sphere::{build_sphere, build_sphere_with, tetrahedron, CapOptions, TriangulatedSphere};
pub use star::StarChart;

use crate::math::{cos_ramp, floor, hypot, rem_euclid};
use crate::{Error, Result};

pub type Point = [f64; 2];

/// Default grid resolution per axis.
pub const DEFAULT_GRID: usize = 512;
/// Default width of the boundary collar on which fields are cut off.
pub const DEFAULT_COLLAR: f64 = 0.02;

/// Regular sampling lattice. With `periodic_x` the `x` direction wraps and
/// carries `nx` columns; otherwise `nx + 1` columns include both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub periodic_x: bool,
}

/// Location of a point inside a grid cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellLoc {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub fx: f64,
    pub fy: f64,
}

impl Grid {
    pub fn columns(&self) -> usize {
        if self.periodic_x {
            self.nx
        } else {
            self.nx + 1
        }
    }

    pub fn rows(&self) -> usize {
        self.ny + 1
    }

    pub fn len(&self) -> usize {
        self.columns() * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.height / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.columns() + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Point {
        [
            self.x0 + i as f64 * self.dx(),
            self.y0 + j as f64 * self.dy(),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        let [x, y] = p;
        if !(x.is_finite() && y.is_finite()) {
            return false;
        }
        let in_y = y >= self.y0 && y <= self.y0 + self.height;
        let in_x = self.periodic_x || (x >= self.x0 && x <= self.x0 + self.width);
        in_x && in_y
    }

    pub(crate) fn locate(&self, p: Point) -> Option<CellLoc> {
        if !self.contains(p) {
            return None;
        }
        let mut u = (p[0] - self.x0) / self.dx();
        if self.periodic_x {
            u = rem_euclid(u, self.nx as f64);
        }
        let v = (p[1] - self.y0) / self.dy();
        let (i0, fx) = split_cell(u, self.nx);
        let (j0, fy) = split_cell(v, self.ny);
        let i1 = if self.periodic_x {
            (i0 + 1) % self.nx
        } else {
            i0 + 1
        };
        Some(CellLoc { i0, i1, j0, fx, fy })
    }

    /// Shortest displacement from `a` to `b`, wrapping in `x` when periodic.
    pub fn delta(&self, a: Point, b: Point) -> Point {
        let mut dx = b[0] - a[0];
        if self.periodic_x {
            dx -= self.width * floor(dx / self.width + 0.5);
        }
        [dx, b[1] - a[1]]
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let d = self.delta(a, b);
        hypot(d[0], d[1])
    }

    pub fn diameter(&self) -> f64 {
        if self.periodic_x {
            hypot(0.5 * self.width, self.height)
        } else {
            hypot(self.width, self.height)
        }
    }
}

fn split_cell(u: f64, n: usize) -> (usize, f64) {
    let f = floor(u);
    let mut i = f as isize;
    let mut frac = u - f;
    if i >= n as isize {
        i = n as isize - 1;
        frac = 1.0;
    }
    if i < 0 {
        i = 0;
        frac = 0.0;
    }
    (i as usize, frac)
}

/// The annulus `S^1 x (0, 1)`, area normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusChart {
    pub n_theta: usize,
    pub n_h: usize,
    pub collar: f64,
    /// Area of the original surface; the chart itself always has area 1.
    pub scale: f64,
}

impl Default for AnnulusChart {
    fn default() -> Self {
        Self {
            n_theta: DEFAULT_GRID,
            n_h: DEFAULT_GRID,
            collar: DEFAULT_COLLAR,
            scale: 1.0,
        }
    }
}

impl AnnulusChart {
    pub fn with_resolution(n: usize) -> Self {
        Self {
            n_theta: n,
            n_h: n,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            x0: 0.0,
            y0: 0.0,
            width: 1.0,
            height: 1.0,
            nx: self.n_theta,
            ny: self.n_h,
            periodic_x: true,
        }
    }
}

/// Axis-aligned rectangle in the plane with `dx ^ dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarChart {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub collar: f64,
}

impl PlanarChart {
    /// Rectangle `[x0, x1] x [y0, y1]` with roughly square cells, the longer
    /// side carrying `n` cells.
    pub fn covering(x0: f64, x1: f64, y0: f64, y1: f64, n: usize, collar: f64) -> Self {
        let (w, h) = (x1 - x0, y1 - y0);
        let (nx, ny) = if w >= h {
            (n, ((n as f64 * h / w) as usize).max(2))
        } else {
            (((n as f64 * w / h) as usize).max(2), n)
        };
        Self {
            x0,
            y0,
            width: w,
            height: h,
            nx,
            ny,
            collar,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            x0: self.x0,
            y0: self.y0,
            width: self.width,
            height: self.height,
            nx: self.nx,
            ny: self.ny,
            periodic_x: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    Annulus(AnnulusChart),
    Planar(PlanarChart),
}

impl Chart {
    pub fn grid(&self) -> Grid {
        match self {
            Chart::Annulus(c) => c.grid(),
            Chart::Planar(c) => c.grid(),
        }
    }

    pub fn collar(&self) -> f64 {
        match self {
            Chart::Annulus(c) => c.collar,
            Chart::Planar(c) => c.collar,
        }
    }

    /// Multiplicative cutoff: 0 within `collar / 2` of the boundary, 1 beyond
    /// `collar`, cosine ramp in between.
    pub fn cutoff(&self, p: Point) -> f64 {
        let delta = self.collar();
        if delta <= 0.0 {
            return 1.0;
        }
        let d = match self {
            Chart::Annulus(_) => p[1].min(1.0 - p[1]),
            Chart::Planar(c) => (p[0] - c.x0)
                .min(c.x0 + c.width - p[0])
                .min(p[1] - c.y0)
                .min(c.y0 + c.height - p[1]),
        };
        cos_ramp(d, 0.5 * delta, delta)
    }
}

/// Round disk in a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn with_area(center: Point, area: f64) -> Self {
        Self {
            center,
            radius: crate::math::sqrt(area / crate::math::PI),
        }
    }

    pub fn area(&self) -> f64 {
        crate::math::PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Point) -> bool {
        hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius
    }

    pub fn boundary_point(&self, angle: f64) -> Point {
        [
            self.center[0] + self.radius * crate::math::cos(angle),
            self.center[1] + self.radius * crate::math::sin(angle),
        ]
    }
}

/// Topological type and area of an open surface of finite type.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub genus: u32,
    pub punctures: u32,
    pub area: f64,
    /// Genus 0 only: puncture positions in the planar chart.
    pub puncture_positions: Vec<Point>,
}

impl SurfaceSpec {
    pub fn new(genus: u32, punctures: u32, area: f64, positions: Vec<Point>) -> Result<Self> {
        let s = Self {
            genus,
            punctures,
            area,
            puncture_positions: positions,
        };
        s.validate()?;
        Ok(s)
    }

    /// Disk with `k` punctures and the given area; positions left empty.
    pub fn punctured_disk(k: u32, area: f64) -> Result<Self> {
        Self::new(0, k, area, Vec::new())
    }

    pub fn annulus(area: f64) -> Result<Self> {
        Self::punctured_disk(1, area)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "area {} must be positive",
                self.area
            )));
        }
        if self.genus == 0 && self.punctures == 0 {
            return Err(Error::OutOfRange(
                "a genus 0 surface needs at least one puncture".into(),
            ));
        }
        if self.genus > 0 && !self.puncture_positions.is_empty() {
            return Err(Error::OutOfRange(
                "puncture positions are only modeled in genus 0".into(),
            ));
        }
        if !self.puncture_positions.is_empty()
            && self.puncture_positions.len() != self.punctures as usize
        {
            return Err(Error::OutOfRange(format!(
                "{} positions for {} punctures",
                self.puncture_positions.len(),
                self.punctures
            )));
        }
        for (a, p) in self.puncture_positions.iter().enumerate() {
            for q in &self.puncture_positions[a + 1..] {
                if p == q {
                    return Err(Error::OutOfRange("puncture positions coincide".into()));
                }
            }
        }
        Ok(())
    }

    /// Rank of `H_1(M; Z)`. Genus 0 surfaces are disks with `k` punctures
    /// (rank `k`); positive genus surfaces are closed surfaces with `k`
    /// points removed (rank `2g + k - 1`, or `2g` when closed).
    pub fn h1_rank(&self) -> usize {
        let g = self.genus as usize;
        let k = self.punctures as usize;
        if g == 0 {
            k
        } else {
            2 * g + k.saturating_sub(1)
        }
    }
}
