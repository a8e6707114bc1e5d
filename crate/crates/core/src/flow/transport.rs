use alloc::vec::Vec;

use super::{flow_checkpoints, flow_point, FlowStats, IntegratorOptions};
use crate::geometry::{polygon_area, Disk, Point, ScalarField};
use crate::math::{ceil, cos, floor, hypot, sin, sqrt, PI, TAU};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    /// Initial number of particles on the boundary of the source disk.
    pub boundary_samples: usize,
    pub interior_samples: usize,
    /// Probe grid resolution per side of the bounding box.
    pub probe: usize,
    /// Boundary particles are inserted until consecutive images are at most
    /// two probe cells apart or this many particles are used.
    pub max_boundary_samples: usize,
    pub integrator: IntegratorOptions,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            boundary_samples: 256,
            interior_samples: 64,
            probe: 256,
            max_boundary_samples: 4096,
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub time: f64,
    /// Probe estimate of the area of the symmetric difference between the
    /// flowed source disk and the target disk.
    pub symmetric_difference: f64,
    pub source_area: f64,
    pub target_area: f64,
    /// Shoelace area of the flowed boundary polygon.
    pub image_area: f64,
    /// `|image_area - source_area| / source_area`.
    pub area_drift: f64,
    /// Fraction of flowed interior particles that land inside the flowed
    /// boundary.
    pub interior_inside: f64,
    pub boundary_samples: usize,
    /// Whether boundary refinement met the spacing target before the
    /// sample cap. Areas of an unresolved image are unreliable.
    pub resolved: bool,
    pub fallback_steps: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Flows each point for `duration` from time 0.
pub fn flow_images(
    h: &ScalarField,
    points: &[Point],
    duration: f64,
    opts: &IntegratorOptions,
) -> Result<(Vec<Point>, FlowStats)> {
    let out = crate::par::map(points, |&p| flow_point(h, p, 0.0, duration, opts));
    let mut images = Vec::with_capacity(points.len());
    let mut stats = FlowStats::default();
    for r in out {
        let (q, s) = r?;
        images.push(q);
        stats.steps += s.steps;
        stats.fallback_steps += s.fallback_steps;
    }
    Ok((images, stats))
}

/// Compares the time-`duration` image of `source` with `target`; passes when
/// the symmetric difference is at most `tol`.
pub fn verify_transport(
    h: &ScalarField,
    source: Disk,
    target: Disk,
    duration: f64,
    tol: f64,
    opts: &TransportOptions,
) -> Result<TransportReport> {
    let mut r = transport_reports(h, source, target, &[duration], tol, opts)?;
    Ok(r.pop().unwrap())
}

/// [`verify_transport`] at several increasing times, sharing one pass of
/// the particle integrations.
pub fn transport_reports(
    h: &ScalarField,
    source: Disk,
    target: Disk,
    times: &[f64],
    tol: f64,
    opts: &TransportOptions,
) -> Result<Vec<TransportReport>> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || times[0] < 0.0 {
        return Err(Error::OutOfRange(
            "times must be nonnegative and increasing".into(),
        ));
    }
    for d in [source, target] {
        let g = h.grid();
        let corners = [
            [d.center[0] - d.radius, d.center[1] - d.radius],
            [d.center[0] + d.radius, d.center[1] + d.radius],
        ];
        if let Some(p) = corners.iter().find(|p| !g.contains(**p)) {
            return Err(Error::OutsideChart { x: p[0], y: p[1] });
        }
    }
    let nb = opts.boundary_samples.max(3);
    let params: Vec<f64> = (0..nb).map(|k| k as f64 / nb as f64).collect();
    let start: Vec<Point> = params
        .iter()
        .map(|&u| source.boundary_point(TAU * u))
        .collect();
    let interior = sunflower(source, opts.interior_samples);
    let all: Vec<Point> = start.iter().chain(interior.iter()).copied().collect();
    let flowed = crate::par::map(&all, |&p| flow_checkpoints(h, p, times, &opts.integrator));
    let mut tracks = Vec::with_capacity(all.len());
    let mut fallback = 0;
    for r in flowed {
        let (pts, s) = r?;
        fallback += s.fallback_steps;
        tracks.push(pts);
    }
    let mut reports = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let mut ring: Vec<(f64, Point)> = params
            .iter()
            .zip(&tracks)
            .map(|(&u, tr)| (u, tr[i]))
            .collect();
        let inner: Vec<Point> = tracks[nb..].iter().map(|tr| tr[i]).collect();
        let mut extra_fallback = 0;
        let resolved = loop {
            let gap = 2.0 * probe_cell(&ring, target, opts.probe);
            let mut new = Vec::new();
            for k in 0..ring.len() {
                let (u0, p0) = ring[k];
                let (u1, p1) = ring[(k + 1) % ring.len()];
                let u1 = if k + 1 == ring.len() { u1 + 1.0 } else { u1 };
                if hypot(p1[0] - p0[0], p1[1] - p0[1]) > gap && u1 - u0 > 1e-9 {
                    new.push(0.5 * (u0 + u1));
                }
            }
            if new.is_empty() {
                break true;
            }
            if ring.len() + new.len() > opts.max_boundary_samples {
                break false;
            }
            let pts: Vec<Point> = new
                .iter()
                .map(|&u| source.boundary_point(TAU * u))
                .collect();
            let (imgs, s) = flow_images(h, &pts, t, &opts.integrator)?;
            extra_fallback += s.fallback_steps;
            ring.extend(new.into_iter().map(|u| u - floor(u)).zip(imgs));
            ring.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        };
        let mut poly: Vec<Point> = ring.iter().map(|r| r.1).collect();
        let mut inner = inner;
        let g = h.grid();
        if g.periodic_x {
            let cx = poly.iter().map(|p| p[0]).sum::<f64>() / poly.len() as f64;
            let k = floor((cx - target.center[0]) / g.width + 0.5) * g.width;
            for p in poly.iter_mut().chain(inner.iter_mut()) {
                p[0] -= k;
            }
        }
        let probe = probe_areas(&poly, target, opts.probe);
        let inside = inner
            .iter()
            .filter(|p| winding_number(&poly, **p) != 0)
            .count();
        let sym = probe.image + probe.target - 2.0 * probe.both;
        let source_area = source.area();
        let image_area = polygon_area(&poly).unwrap_or(0.0);
        reports.push(TransportReport {
            time: t,
            symmetric_difference: sym,
            source_area,
            target_area: target.area(),
            image_area,
            area_drift: (image_area - source_area).abs() / source_area,
            interior_inside: if inner.is_empty() {
                1.0
            } else {
                inside as f64 / inner.len() as f64
            },
            boundary_samples: ring.len(),
            resolved,
            fallback_steps: fallback + extra_fallback,
            tolerance: tol,
            pass: sym <= tol,
        });
    }
    Ok(reports)
}

fn sunflower(d: Disk, n: usize) -> Vec<Point> {
    let golden = PI * (3.0 - sqrt(5.0));
    (0..n)
        .map(|k| {
            let r = 0.95 * d.radius * sqrt((k as f64 + 0.5) / n as f64);
            let a = golden * k as f64;
            [d.center[0] + r * cos(a), d.center[1] + r * sin(a)]
        })
        .collect()
}

struct Bounds {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

fn bounds<'a>(pts: impl Iterator<Item = &'a Point>, target: Disk) -> Bounds {
    let mut b = Bounds {
        x0: target.center[0] - target.radius,
        y0: target.center[1] - target.radius,
        x1: target.center[0] + target.radius,
        y1: target.center[1] + target.radius,
    };
    for p in pts {
        b.x0 = b.x0.min(p[0]);
        b.y0 = b.y0.min(p[1]);
        b.x1 = b.x1.max(p[0]);
        b.y1 = b.y1.max(p[1]);
    }
    b
}

fn probe_cell(ring: &[(f64, Point)], target: Disk, n: usize) -> f64 {
    let b = bounds(ring.iter().map(|r| &r.1), target);
    (b.x1 - b.x0).max(b.y1 - b.y0) / n as f64
}

struct ProbeAreas {
    image: f64,
    target: f64,
    both: f64,
}

/// Counts probe cell centers inside the polygon (nonzero winding), inside
/// the target disk and inside both, by scanlines.
fn probe_areas(poly: &[Point], target: Disk, n: usize) -> ProbeAreas {
    let b = bounds(poly.iter(), target);
    let (cw, ch) = ((b.x1 - b.x0) / n as f64, (b.y1 - b.y0) / n as f64);
    let mut rows: Vec<Vec<(f64, i32)>> = (0..n).map(|_| Vec::new()).collect();
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        if p[1] == q[1] {
            continue;
        }
        let (lo, hi, dir) = if p[1] < q[1] { (p, q, 1) } else { (q, p, -1) };
        // rows whose center y_j = y0 + (j + 1/2) ch lies in [lo, hi)
        let j0 = ceil((lo[1] - b.y0) / ch - 0.5).max(0.0) as usize;
        let j1 = ceil((hi[1] - b.y0) / ch - 0.5).min(n as f64) as usize;
        for (j, row) in rows.iter_mut().enumerate().take(j1).skip(j0) {
            let y = b.y0 + (j as f64 + 0.5) * ch;
            let s = (y - lo[1]) / (hi[1] - lo[1]);
            row.push((lo[0] + s * (hi[0] - lo[0]), dir));
        }
    }
    let (mut image, mut tgt, mut both) = (0usize, 0usize, 0usize);
    for (j, row) in rows.iter_mut().enumerate() {
        row.sort_by(|a, c| a.0.partial_cmp(&c.0).unwrap());
        let y = b.y0 + (j as f64 + 0.5) * ch;
        let mut w = 0;
        let mut next = 0;
        for i in 0..n {
            let x = b.x0 + (i as f64 + 0.5) * cw;
            while next < row.len() && row[next].0 < x {
                w += row[next].1;
                next += 1;
            }
            let in_img = w != 0;
            let in_tgt = target.contains([x, y]);
            image += in_img as usize;
            tgt += in_tgt as usize;
            both += (in_img && in_tgt) as usize;
        }
    }
    let a = cw * ch;
    ProbeAreas {
        image: image as f64 * a,
        target: tgt as f64 * a,
        both: both as f64 * a,
    }
}

/// Winding number of the closed polygon around `p`.
fn winding_number(poly: &[Point], p: Point) -> i32 {
    let mut w = 0;
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let side = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            w -= 1;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlanarChart;

    #[test]
    fn probe_areas_of_a_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let t = Disk::new([0.5, 0.5], 0.25);
        let a = probe_areas(&sq, t, 256);
        assert!((a.image - 1.0).abs() < 1e-12);
        assert!((a.target - t.area()).abs() < 2e-3);
        assert_eq!(a.both, a.target);
        let cw: Vec<Point> = sq.iter().rev().copied().collect();
        assert!((probe_areas(&cw, t, 256).image - 1.0).abs() < 1e-12);
        assert_eq!(winding_number(&sq, [0.5, 0.5]), 1);
        assert_eq!(winding_number(&cw, [0.5, 0.5]), -1);
        assert_eq!(winding_number(&sq, [1.5, 0.5]), 0);
    }

    #[test]
    fn zero_field_transport() {
        let g = PlanarChart::covering(-1.0, 1.0, -1.0, 1.0, 32, 0.0).grid();
        let h = ScalarField::zeros(g);
        let d1 = Disk::with_area([-0.4, 0.0], 0.2);
        let opts = TransportOptions::default();
        let same = verify_transport(&h, d1, d1, 1.0, 0.01, &opts).unwrap();
        assert!(same.symmetric_difference.abs() < 1e-12 && same.pass);
        assert_eq!(same.interior_inside, 1.0);
        let d2 = Disk::with_area([0.4, 0.0], 0.2);
        let apart = verify_transport(&h, d1, d2, 1.0, 0.01, &opts).unwrap();
        assert!((apart.symmetric_difference - 0.4).abs() < 0.01, "{apart:?}");
        assert!(!apart.pass);
    }
}
