use alloc::format;
use alloc::vec::Vec;

use crate::geometry::{Disk, Grid, Point, ScalarField};
use crate::math::{atan2, ceil, cos, cos_ramp, hypot, rem_euclid, sin, sqrt, tan, PI, TAU};
use crate::{Error, Result};

/// Half-width of a tube segment along its axis.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    Pipe,
    /// Diameter of a disk; the tube widens to the disk.
    Disk {
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Line {
        a: Point,
        dir: Point,
        len: f64,
        profile: Profile,
    },
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

/// What the field does in the region enclosed by the ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Hole {
    Plateau,
    /// Falls from 1 to 0 between these distances from the tube.
    Cutoff {
        start: f64,
        end: f64,
    },
}

/// Closed tube around a centerline of straight pieces and circular fillets.
/// Across the tube the field rises linearly from 0 outside to 1 on the
/// enclosed side, so the flux through every cross-section is 1 and the
/// flow crosses any slab of the tube in time equal to its area.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Ring {
    pieces: Vec<Piece>,
    half_width: f64,
    smoothing: f64,
    outline: Vec<Point>,
    hole: Hole,
}

/// Corner of a pipe centerline and the fillet radius used there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub at: Point,
    pub radius: f64,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: Point, b: Point, s: f64) -> Point {
    [a[0] + s * b[0], a[1] + s * b[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn left(d: Point) -> Point {
    [-d[1], d[0]]
}

fn norm(a: Point) -> f64 {
    hypot(a[0], a[1])
}

fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

/// `max(a, b)` rounded over a band of width `k`.
fn smooth_max(a: f64, b: f64, k: f64) -> f64 {
    if k <= 0.0 {
        return a.max(b);
    }
    let h = (k - (a - b).abs()).max(0.0) / k;
    a.max(b) + 0.25 * h * h * k
}

impl Ring {
    /// Builds the ring through `corners` (closed, counterclockwise). Segment
    /// `i` runs from corner `i` to corner `i + 1`; the segments listed in
    /// `disks` must be diameters of their disks and meet straight segments.
    pub(crate) fn new(
        corners: &[Waypoint],
        disks: &[(usize, Disk)],
        half_width: f64,
        smoothing: f64,
        hole: Hole,
    ) -> Result<Self> {
        let n = corners.len();
        if n < 3 {
            return Err(Error::Geometry(
                "a ring needs at least three corners".into(),
            ));
        }
        let seg = |i: usize| sub(corners[(i + 1) % n].at, corners[i].at);
        for i in 0..n {
            if norm(seg(i)) <= 0.0 {
                return Err(Error::Geometry(format!("repeated corner {i}")));
            }
        }
        let mut trims = alloc::vec![0.0; n];
        let mut turns = alloc::vec![0.0; n];
        for i in 0..n {
            let din = unit(seg((i + n - 1) % n));
            let dout = unit(seg(i));
            let turn = atan2(cross(din, dout), dot(din, dout));
            if turn.abs() > PI - 1e-6 {
                return Err(Error::Geometry(format!("corner {i} reverses direction")));
            }
            turns[i] = turn;
            if turn.abs() > 1e-12 {
                if !(corners[i].radius > half_width) {
                    return Err(Error::Geometry(format!(
                        "fillet radius {} at corner {i} must exceed the half-width {half_width}",
                        corners[i].radius
                    )));
                }
                let touches_disk = disks.iter().any(|&(s, _)| s == i || (s + 1) % n == i);
                if touches_disk {
                    return Err(Error::Geometry(format!(
                        "the pipe must leave disk {i} along its diameter"
                    )));
                }
                trims[i] = corners[i].radius * tan(0.5 * turn.abs());
            }
        }
        let mut pieces = Vec::new();
        for i in 0..n {
            let d = unit(seg((i + n - 1) % n));
            if trims[i] > 0.0 {
                let p = add(corners[i].at, d, -trims[i]);
                let r = corners[i].radius;
                let side = if turns[i] > 0.0 { 1.0 } else { -1.0 };
                let center = add(p, left(d), side * r);
                let q = sub(p, center);
                pieces.push(Piece::Arc {
                    center,
                    radius: r,
                    start: atan2(q[1], q[0]),
                    sweep: turns[i],
                });
            }
            let s = seg(i);
            let len = norm(s);
            let dir = unit(s);
            let j = (i + 1) % n;
            let trimmed = len - trims[i] - trims[j];
            if trimmed < -1e-12 {
                return Err(Error::Geometry(format!(
                    "segment {i} of length {len} is too short for its fillets"
                )));
            }
            let profile = match disks.iter().find(|&&(s, _)| s == i) {
                Some(&(_, disk)) => {
                    let mid = add(corners[i].at, dir, 0.5 * len);
                    if norm(sub(mid, disk.center)) > 1e-9 * (1.0 + disk.radius)
                        || (0.5 * len - disk.radius).abs() > 1e-9 * (1.0 + disk.radius)
                    {
                        return Err(Error::Geometry(format!(
                            "segment {i} is not a diameter of its disk"
                        )));
                    }
                    Profile::Disk {
                        radius: disk.radius,
                    }
                }
                None => Profile::Pipe,
            };
            if trimmed > 0.0 {
                pieces.push(Piece::Line {
                    a: add(corners[i].at, dir, trims[i]),
                    dir,
                    len: trimmed,
                    profile,
                });
            }
        }
        let outline = outline(&pieces);
        let ring = Self {
            pieces,
            half_width,
            smoothing,
            outline,
            hole,
        };
        ring.check_simple()?;
        if crate::geometry::polygon_area(&ring.outline).is_err()
            || signed_area(&ring.outline) <= 0.0
        {
            return Err(Error::Geometry("the ring must run counterclockwise".into()));
        }
        Ok(ring)
    }

    fn width_at(&self, profile: Profile, s: f64, len: f64) -> f64 {
        match profile {
            Profile::Pipe => self.half_width,
            Profile::Disk { radius } => {
                let x = s - 0.5 * len;
                let chord = sqrt((radius * radius - x * x).max(0.0));
                smooth_max(chord, self.half_width, self.smoothing)
            }
        }
    }

    /// Tube coordinate `u ∈ [0, 1]` of `p` in piece `k`, if `p` is in its tube.
    fn piece_value(&self, k: usize, p: Point) -> Option<f64> {
        match self.pieces[k] {
            Piece::Line {
                a,
                dir,
                len,
                profile,
            } => {
                let q = sub(p, a);
                let s = dot(q, dir);
                if s < 0.0 || s > len {
                    return None;
                }
                let n = dot(q, left(dir));
                let w = self.width_at(profile, s, len);
                (n.abs() <= w).then(|| 0.5 * (1.0 + n / w))
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let q = sub(p, center);
                let rho = norm(q);
                let lam = rem_euclid((atan2(q[1], q[0]) - start) * sweep.signum(), TAU);
                if lam > sweep.abs() {
                    return None;
                }
                let n = if sweep > 0.0 {
                    radius - rho
                } else {
                    rho - radius
                };
                let w = self.half_width;
                (n.abs() <= w).then(|| 0.5 * (1.0 + n / w))
            }
        }
    }

    /// Approximate distance from `p` to the tube.
    fn tube_distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for piece in &self.pieces {
            let d = match *piece {
                Piece::Line {
                    a,
                    dir,
                    len,
                    profile,
                } => {
                    let s = dot(sub(p, a), dir).clamp(0.0, len);
                    let w = self.width_at(profile, s, len);
                    let across = norm(sub(p, add(a, dir, s))) - w;
                    match profile {
                        Profile::Pipe => across,
                        Profile::Disk { radius } => {
                            across.min(norm(sub(p, add(a, dir, 0.5 * len))) - radius)
                        }
                    }
                }
                Piece::Arc {
                    center,
                    radius,
                    start,
                    sweep,
                } => {
                    let q = sub(p, center);
                    let lam = rem_euclid((atan2(q[1], q[0]) - start) * sweep.signum(), TAU);
                    if lam <= sweep.abs() {
                        (norm(q) - radius).abs() - self.half_width
                    } else {
                        let e0 = arc_point(center, radius, start, 0.0);
                        let e1 = arc_point(center, radius, start, sweep);
                        norm(sub(p, e0)).min(norm(sub(p, e1))) - self.half_width
                    }
                }
            };
            best = best.min(d);
        }
        best
    }

    fn hole_value(&self, p: Point) -> f64 {
        match self.hole {
            Hole::Plateau => 1.0,
            Hole::Cutoff { start, end } => 1.0 - cos_ramp(self.tube_distance(p), start, end),
        }
    }

    /// Field value, or an error when two tubes that are not neighbors
    /// overlap at `p`.
    fn value_with(&self, p: Point, inside: bool) -> Result<f64> {
        let n = self.pieces.len();
        let mut hit: Option<(usize, f64)> = None;
        for k in 0..n {
            if let Some(u) = self.piece_value(k, p) {
                if let Some((j, _)) = hit {
                    let adjacent = k == j + 1 || (j == 0 && k == n - 1);
                    if !adjacent {
                        return Err(Error::Geometry(format!(
                            "pipes overlap at ({:.4}, {:.4})",
                            p[0], p[1]
                        )));
                    }
                } else {
                    hit = Some((k, u));
                }
            }
        }
        Ok(match hit {
            Some((_, u)) => u,
            None if inside => self.hole_value(p),
            None => 0.0,
        })
    }

    pub(crate) fn value(&self, p: Point) -> Result<f64> {
        self.value_with(p, winding(&self.outline, p) != 0)
    }

    pub(crate) fn in_tube(&self, p: Point) -> bool {
        (0..self.pieces.len()).any(|k| self.piece_value(k, p).is_some())
    }

    pub(crate) fn encloses(&self, p: Point) -> bool {
        winding(&self.outline, p) != 0 && !self.in_tube(p)
    }

    pub(crate) fn distance_to_tube(&self, p: Point) -> f64 {
        self.tube_distance(p)
    }

    /// Length of the pipe centerline (pieces that are not disks).
    pub(crate) fn pipe_length(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| match *p {
                Piece::Line {
                    len,
                    profile: Profile::Pipe,
                    ..
                } => len,
                Piece::Line { .. } => 0.0,
                Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
            })
            .sum()
    }

    /// Samples `scale · value` on `grid`, checking that tubes do not overlap
    /// and that the support stays off the grid boundary.
    pub(crate) fn sample(&self, grid: Grid, scale: f64) -> Result<ScalarField> {
        let mut samples = Vec::with_capacity(grid.len());
        for j in 0..grid.rows() {
            let y = grid.y0 + j as f64 * grid.dy();
            let crossings = row_crossings(&self.outline, y);
            let mut w = 0;
            let mut next = 0;
            for i in 0..grid.columns() {
                let p = grid.node(i, j);
                while next < crossings.len() && crossings[next].0 < p[0] {
                    w += crossings[next].1;
                    next += 1;
                }
                let v = self.value_with(p, w != 0)?;
                let edge = i == 0 || j == 0 || i + 1 == grid.columns() || j + 1 == grid.rows();
                if edge && v != 0.0 {
                    return Err(Error::Geometry(format!(
                        "support reaches the chart boundary at ({:.4}, {:.4})",
                        p[0], p[1]
                    )));
                }
                samples.push(scale * v);
            }
        }
        ScalarField::autonomous(grid, samples)
    }

    /// Rejects centerlines whose non-adjacent edges cross.
    fn check_simple(&self) -> Result<()> {
        let m = self.outline.len();
        for i in 0..m {
            let (a, b) = (self.outline[i], self.outline[(i + 1) % m]);
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (c, d) = (self.outline[j], self.outline[(j + 1) % m]);
                if segments_cross(a, b, c, d) {
                    return Err(Error::Geometry(format!(
                        "loop self-intersection near ({:.4}, {:.4})",
                        a[0], a[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn arc_point(center: Point, r: f64, start: f64, t: f64) -> Point {
    [
        center[0] + r * cos(start + t),
        center[1] + r * sin(start + t),
    ]
}

fn outline(pieces: &[Piece]) -> Vec<Point> {
    let mut pts = Vec::new();
    for piece in pieces {
        match *piece {
            Piece::Line { a, .. } => pts.push(a),
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let k = ceil(sweep.abs() / 0.05).max(2.0) as usize;
                for m in 0..k {
                    pts.push(arc_point(
                        center,
                        radius,
                        start,
                        sweep * m as f64 / k as f64,
                    ));
                }
            }
        }
    }
    pts
}

fn signed_area(pts: &[Point]) -> f64 {
    let m = pts.len();
    0.5 * (0..m).map(|k| cross(pts[k], pts[(k + 1) % m])).sum::<f64>()
}

pub(crate) fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o = |p: Point, q: Point, r: Point| cross(sub(q, p), sub(r, p));
    let (d1, d2) = (o(c, d, a), o(c, d, b));
    let (d3, d4) = (o(a, b, c), o(a, b, d));
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Sorted `x` positions where the closed polygon crosses the horizontal line
/// at `y`, with `+1` for upward and `-1` for downward edges.
fn row_crossings(poly: &[Point], y: f64) -> Vec<(f64, i32)> {
    let m = poly.len();
    let mut out = Vec::new();
    for k in 0..m {
        let (p, q) = (poly[k], poly[(k + 1) % m]);
        let up = p[1] <= y && q[1] > y;
        let down = q[1] <= y && p[1] > y;
        if up || down {
            let x = p[0] + (y - p[1]) / (q[1] - p[1]) * (q[0] - p[0]);
            out.push((x, if up { 1 } else { -1 }));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn winding(poly: &[Point], p: Point) -> i32 {
    // the crossings to the left of p, counted upward, give the winding
    // number of a counterclockwise polygon with the opposite sign
    -row_crossings(poly, p[1])
        .iter()
        .filter(|c| c.0 < p[0])
        .map(|c| c.1)
        .sum::<i32>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(r: f64) -> Vec<Waypoint> {
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|&at| Waypoint { at, radius: r })
            .collect()
    }

    #[test]
    fn filleted_square() {
        let ring = Ring::new(&square(0.2), &[], 0.05, 0.0, Hole::Plateau).unwrap();
        assert_eq!(ring.value([0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(ring.value([2.0, 0.5]).unwrap(), 0.0);
        assert!((ring.value([0.5, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((ring.value([0.5, 0.025]).unwrap() - 0.75).abs() < 1e-12);
        assert!((ring.value([1.025, 0.5]).unwrap() - 0.25).abs() < 1e-12);
        let len = ring.pipe_length();
        let want = 4.0 - 8.0 * 0.2 + 2.0 * PI * 0.2;
        assert!((len - want).abs() < 1e-12);
        // arc: a point on the fillet centerline
        let c = [0.8, 0.2];
        let p = [c[0] + 0.2 * (PI / 4.0).cos(), c[1] - 0.2 * (PI / 4.0).sin()];
        assert!((ring.value(p).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn clockwise_and_crossing_rings_are_rejected() {
        let mut cw = square(0.2);
        cw.reverse();
        assert!(Ring::new(&cw, &[], 0.05, 0.0, Hole::Plateau).is_err());
        let bow: Vec<Waypoint> = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]
            .iter()
            .map(|&at| Waypoint { at, radius: 0.01 })
            .collect();
        assert!(Ring::new(&bow, &[], 0.001, 0.0, Hole::Plateau).is_err());
        assert!(Ring::new(&square(0.6), &[], 0.05, 0.0, Hole::Plateau).is_err());
    }

    #[test]
    fn disk_segment_widens() {
        let d = Disk::new([0.0, 0.0], 0.3);
        let corners: Vec<Waypoint> = [
            [-0.3, 0.0],
            [0.3, 0.0],
            [0.6, 0.0],
            [0.6, 0.6],
            [-0.6, 0.6],
            [-0.6, 0.0],
        ]
        .iter()
        .map(|&at| Waypoint { at, radius: 0.1 })
        .collect();
        let ring = Ring::new(&corners, &[(0, d)], 0.02, 0.005, Hole::Plateau).unwrap();
        assert!((ring.value([0.0, 0.15]).unwrap() - 0.75).abs() < 1e-12);
        assert!((ring.value([0.0, -0.3]).unwrap() - 0.0).abs() < 1e-12);
        assert_eq!(ring.value([0.0, 0.35]).unwrap(), 1.0);
        assert_eq!(ring.value([0.0, -0.35]).unwrap(), 0.0);
    }
}
