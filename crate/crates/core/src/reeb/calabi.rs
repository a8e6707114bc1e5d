use alloc::format;
use alloc::vec::Vec;

use super::{build_contour_tree, find_median, DEFAULT_SLABS};
use crate::geometry::{
    build_sphere, AnnulusChart, Disk, Point, ScalarField, StarChart, TriangulatedSphere,
    DEFAULT_GRID,
};
use crate::{Error, Result};

/// Resolution knobs shared by the tree-based evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReebOptions {
    /// Level slabs across the full range of the function.
    pub slabs: usize,
    /// Annulus grid used when a planar field is moved to a puncture chart.
    pub grid: usize,
}

impl Default for ReebOptions {
    fn default() -> Self {
        Self {
            slabs: DEFAULT_SLABS,
            grid: DEFAULT_GRID,
        }
    }
}

/// `∫ F ω - Area(S²) · F(median)`.
pub fn calabi_sphere(sphere: &TriangulatedSphere, opts: &ReebOptions) -> Result<f64> {
    let tree = build_contour_tree(sphere, opts.slabs)?;
    let median = find_median(&tree)?;
    Ok(sphere.integral() - sphere.total_area() * median.value)
}

/// Calabi quasimorphism of the sphere pulled back along the embedding of the
/// annulus with a disk of area `s` glued below.
pub fn cal_j(h: &ScalarField, s: f64, a: f64, opts: &ReebOptions) -> Result<f64> {
    calabi_sphere(&build_sphere(h, s, a)?, opts)
}

fn check_parameters(a: f64, s1: f64, s2: f64) -> Result<()> {
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::OutOfRange(format!("A = {a} must lie in (1/2, 1)")));
    }
    if !(0.0 <= s1 && s1 < s2 && s2 <= 2.0 * a - 1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!(
            "need 0 <= s1 < s2 <= 2A - 1, got s1 = {s1}, s2 = {s2}, A = {a}"
        )));
    }
    Ok(())
}

/// `cal_j(s2) - cal_j(s1)`.
pub fn rho_raw(h: &ScalarField, a: f64, s1: f64, s2: f64, opts: &ReebOptions) -> Result<f64> {
    check_parameters(a, s1, s2)?;
    let vals = crate::par::map(&[s2, s1], |&s| cal_j(h, s, a, opts));
    let mut it = vals.into_iter();
    let (c2, c1) = (it.next().unwrap()?, it.next().unwrap()?);
    Ok(c2 - c1)
}

/// `rho_raw` divided by its value `2A (s2 - s1)` on the unit shift.
pub fn rho_normalized(
    h: &ScalarField,
    a: f64,
    s1: f64,
    s2: f64,
    opts: &ReebOptions,
) -> Result<f64> {
    Ok(rho_raw(h, a, s1, s2, opts)? / (2.0 * a * (s2 - s1)))
}

/// Coefficients of the normalized quasimorphism in the basis of small loops
/// around the punctures of the disk `domain`. For each puncture the field is
/// moved to the annulus chart around it (all other punctures filled in).
pub fn rho_vector(
    h: &ScalarField,
    domain: Disk,
    punctures: &[Point],
    a: f64,
    s1: f64,
    s2: f64,
    opts: &ReebOptions,
) -> Result<Vec<f64>> {
    check_parameters(a, s1, s2)?;
    if !h.is_autonomous() {
        return Err(Error::NotAutonomous);
    }
    punctures
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let g = puncture_chart_field(h, domain, p, opts.grid).map_err(|e| match e {
                Error::NotCompactlySupported(m) => Error::Geometry(format!("puncture {j}: {m}")),
                other => other,
            })?;
            rho_normalized(&g, a, s1, s2, opts)
        })
        .collect()
}

/// Field `h` read in the annulus chart around `p` on an `n x n` grid.
pub fn puncture_chart_field(
    h: &ScalarField,
    domain: Disk,
    p: Point,
    n: usize,
) -> Result<ScalarField> {
    let chart = StarChart::new(domain, p)?;
    let grid = AnnulusChart::with_resolution(n).grid();
    let scale = h.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut samples = Vec::with_capacity(grid.len());
    for j in 0..grid.rows() {
        for i in 0..grid.columns() {
            let q = chart.from_annulus(grid.node(i, j));
            let v = h
                .value(q, 0.0)
                .ok_or(Error::OutsideChart { x: q[0], y: q[1] })?;
            if j == 0 || j == n {
                if v.abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::NotCompactlySupported(format!(
                        "field is {v} at {q:?}; the support is too close to the puncture or the boundary"
                    )));
                }
                samples.push(0.0);
            } else {
                samples.push(v);
            }
        }
    }
    ScalarField::autonomous(grid, samples)
}

/// `∫_0^1 ∫ H_t ω dt` for a field supported in `disk`.
pub fn calabi_disk(h: &ScalarField, disk: Disk) -> Result<f64> {
    let g = h.grid();
    for layer in h.layers() {
        for j in 0..g.rows() {
            for i in 0..g.columns() {
                let p = g.node(i, j);
                if g.distance(p, disk.center) > disk.radius && layer[g.index(i, j)] != 0.0 {
                    return Err(Error::NotCompactlySupported(format!(
                        "field is nonzero at {p:?}, outside the declared disk"
                    )));
                }
            }
        }
    }
    if h.is_autonomous() {
        return Ok(h.integral_at(0.0));
    }
    let mut breaks: Vec<f64> = core::iter::once(0.0)
        .chain(h.knots().iter().copied().filter(|&t| t > 0.0 && t < 1.0))
        .chain(core::iter::once(1.0))
        .collect();
    breaks.dedup();
    Ok(breaks
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (h.integral_at(w[0]) + h.integral_at(w[1])))
        .sum())
}
