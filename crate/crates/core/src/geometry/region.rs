use alloc::format;

use super::{Disk, Grid, Point};
use crate::{Error, Result};

/// Region of a chart whose area is wanted.
#[derive(Clone, Copy)]
pub enum Region<'a> {
    Full,
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk(Disk),
    Polygon(&'a [Point]),
    Predicate(&'a dyn Fn(Point) -> bool),
}

/// Sub-samples per cell side used by the predicate quadrature.
const SUPERSAMPLE: usize = 4;

/// Area of `region` under the chart's area form.
///
/// Rectangles and polygons are measured exactly; disks and predicates by
/// midpoint quadrature on the chart grid refined `SUPERSAMPLE` times per
/// axis, so the result is deterministic for a fixed grid.
pub fn region_area(grid: &Grid, region: Region<'_>) -> Result<f64> {
    match region {
        Region::Full => Ok(grid.area()),
        Region::Rect { x0, x1, y0, y1 } => {
            if !(x1 > x0 && y1 > y0) {
                return Err(Error::Degenerate(format!(
                    "rectangle [{x0}, {x1}] x [{y0}, {y1}]"
                )));
            }
            let w = if grid.periodic_x {
                (x1 - x0).min(grid.width)
            } else {
                (x1.min(grid.x0 + grid.width) - x0.max(grid.x0)).max(0.0)
            };
            let h = (y1.min(grid.y0 + grid.height) - y0.max(grid.y0)).max(0.0);
            Ok(w * h)
        }
        Region::Polygon(pts) => polygon_area(pts),
        Region::Disk(d) => {
            if !(d.radius > 0.0) {
                return Err(Error::Degenerate(format!("disk radius {}", d.radius)));
            }
            Ok(quadrature(grid, &|p| {
                let q = grid.delta(d.center, p);
                q[0] * q[0] + q[1] * q[1] <= d.radius * d.radius
            }))
        }
        Region::Predicate(f) => Ok(quadrature(grid, f)),
    }
}

fn quadrature(grid: &Grid, inside: &dyn Fn(Point) -> bool) -> f64 {
    let nx = grid.nx * SUPERSAMPLE;
    let ny = grid.ny * SUPERSAMPLE;
    let hx = grid.width / nx as f64;
    let hy = grid.height / ny as f64;
    let mut count = 0usize;
    for j in 0..ny {
        let y = grid.y0 + (j as f64 + 0.5) * hy;
        for i in 0..nx {
            let x = grid.x0 + (i as f64 + 0.5) * hx;
            if inside([x, y]) {
                count += 1;
            }
        }
    }
    count as f64 * hx * hy
}

/// Unsigned shoelace area of a simple polygon.
pub fn polygon_area(pts: &[Point]) -> Result<f64> {
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!(
            "polygon with {} vertices",
            pts.len()
        )));
    }
    let mut twice = 0.0;
    let mut scale: f64 = 0.0;
    for (k, p) in pts.iter().enumerate() {
        let q = pts[(k + 1) % pts.len()];
        twice += p[0] * q[1] - q[0] * p[1];
        scale = scale.max(p[0].abs()).max(p[1].abs());
    }
    let area = 0.5 * twice.abs();
    if !(area > 1e-14 * (1.0 + scale * scale)) {
        return Err(Error::Degenerate("polygon has zero area".into()));
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AnnulusChart, PlanarChart};
    use crate::math::PI;

    #[test]
    fn full_annulus_has_unit_area() {
        let g = AnnulusChart::default().grid();
        assert_eq!(region_area(&g, Region::Full).unwrap(), 1.0);
    }

    #[test]
    fn product_rectangle() {
        let g = AnnulusChart::default().grid();
        let a = region_area(
            &g,
            Region::Rect {
                x0: 0.0,
                x1: 0.5,
                y0: 0.2,
                y1: 0.6,
            },
        )
        .unwrap();
        assert!((a - 0.2).abs() < 1e-15);
        let pred = |p: Point| p[0] < 0.5 && p[1] > 0.2 && p[1] < 0.6;
        let q = region_area(&g, Region::Predicate(&pred)).unwrap();
        assert!((q - 0.2).abs() < 1e-3);
    }

    #[test]
    fn planar_disk_matches_pi_r_squared() {
        let g = PlanarChart::covering(-1.0, 1.0, -1.0, 1.0, 512, 0.0).grid();
        for &r in &[0.1, 0.25, 0.7] {
            let a = region_area(&g, Region::Disk(Disk::new([0.1, -0.05], r))).unwrap();
            let exact = PI * r * r;
            assert!((a - exact).abs() < 0.01 * exact, "r={r}: {a} vs {exact}");
        }
    }

    #[test]
    fn polygon_shoelace_and_degenerate() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        assert_eq!(polygon_area(&sq).unwrap(), 2.0);
        let line = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        assert!(matches!(polygon_area(&line), Err(Error::Degenerate(_))));
        assert!(polygon_area(&sq[..2]).is_err());
    }
}
