use alloc::format;
use alloc::vec::Vec;

use super::ring::{Hole, Ring, Waypoint};
use crate::geometry::{region_area, Disk, PlanarChart, Point, Region, ScalarField};
use crate::math::hypot;
use crate::{Error, Result};

/// Pipe parameters. Lengths are in chart units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeSpec {
    /// Full width `w` of a pipe.
    pub width: f64,
    /// Band over which the tube half-width is rounded where a pipe meets a
    /// disk.
    pub smoothing: f64,
    /// Default fillet radius at the corners of a route.
    pub fillet: f64,
    /// Value on the enclosed side of the tube.
    pub plateau: f64,
    /// The tube around a transported disk is a concentric disk wider by
    /// this much, so that the disk boundary moves with the flow.
    pub margin: f64,
}

impl PipeSpec {
    pub fn with_width(width: f64) -> Self {
        Self {
            width,
            smoothing: 0.25 * width,
            fillet: width,
            plateau: 1.0,
            margin: 0.25 * width,
        }
    }

    /// `w = 0.02 · diameter` of the chart.
    pub fn for_chart(chart: &PlanarChart) -> Self {
        Self::with_width(0.02 * chart.grid().diameter())
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.width > 0.0
            && self.smoothing >= 0.0
            && self.smoothing < 0.5 * self.width
            && self.fillet > 0.5 * self.width
            && self.plateau > 0.0
            && self.margin > 0.0
            && self.plateau.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!(
                "invalid pipe parameters {self:?}"
            )))
        }
    }

    fn half(&self) -> f64 {
        0.5 * self.width
    }

    /// Stub length between a disk and the first corner of its pipe.
    fn stub(&self) -> f64 {
        self.fillet + self.width
    }

    /// Distance from the tube at which the enclosed plateau of a loop
    /// translation starts and stops falling to 0.
    fn cutoff(&self) -> (f64, f64) {
        (0.25 * self.width, 0.5 * self.width)
    }

    /// Clearance kept between punctures and tubes.
    fn clearance(&self) -> f64 {
        0.75 * self.width
    }

    /// Half-width of the detour a loop route makes around an excluded
    /// puncture.
    fn dip(&self) -> f64 {
        self.fillet + 0.5 * self.width
    }

    /// Shortest straight run between two corners of a loop route.
    fn run(&self) -> f64 {
        2.0 * self.fillet + 0.5 * self.width
    }
}

/// Autonomous field built from a pipe ring, with its geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub field: ScalarField,
    pub chart: PlanarChart,
    pub spec: PipeSpec,
    pub source: Disk,
    pub target: Disk,
    /// Area of the tube (disks and pipes).
    pub tube_area: f64,
    /// Area of the enclosed region where the field is positive.
    pub hole_area: f64,
    pub support_area: f64,
    pub pipe_length: f64,
    ring: Ring,
}

impl Construction {
    fn new(
        ring: Ring,
        chart: PlanarChart,
        spec: PipeSpec,
        source: Disk,
        target: Disk,
    ) -> Result<Self> {
        let grid = chart.grid();
        let field = ring.sample(grid, spec.plateau)?;
        let tube = |p: Point| ring.in_tube(p);
        let hole = |p: Point| ring.encloses(p) && ring.value(p).is_ok_and(|v| v > 0.0);
        let tube_area = region_area(&grid, Region::Predicate(&tube))?;
        let hole_area = region_area(&grid, Region::Predicate(&hole))?;
        Ok(Self {
            field,
            chart,
            spec,
            source,
            target,
            tube_area,
            hole_area,
            support_area: tube_area + hole_area,
            pipe_length: ring.pipe_length(),
            ring,
        })
    }

    /// Whether `p` lies in the declared support (tube or positive part of
    /// the enclosed region).
    pub fn support_contains(&self, p: Point) -> bool {
        self.ring.in_tube(p)
            || (self.ring.encloses(p) && self.ring.value(p).is_ok_and(|v| v > 0.0))
    }

    /// Whether `p` lies in the region enclosed by the ring.
    pub fn encloses(&self, p: Point) -> bool {
        self.ring.encloses(p)
    }

    pub fn distance_to_tube(&self, p: Point) -> f64 {
        self.ring.distance_to_tube(p)
    }

    /// The same construction with the field negated; its flow runs the
    /// other way around the ring.
    pub fn reversed(mut self) -> Self {
        self.field = self.field.scaled(-1.0);
        core::mem::swap(&mut self.source, &mut self.target);
        self
    }
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

fn unit(a: Point) -> Point {
    let n = hypot(a[0], a[1]);
    [a[0] / n, a[1] / n]
}

fn dist(a: Point, b: Point) -> f64 {
    hypot(a[0] - b[0], a[1] - b[1])
}

fn on_boundary(d: Disk, p: Point) -> bool {
    (dist(p, d.center) - d.radius).abs() <= 1e-9 * (1.0 + d.radius)
}

fn collinear(dir: Point, from: Point, to: Point) -> bool {
    let v = unit(sub(to, from));
    (v[0] * dir[1] - v[1] * dir[0]).abs() < 1e-12 && dot(v, dir) > 0.0
}

/// Rejects polylines that enter `d` anywhere but at their first and last
/// points.
fn avoid_interior(d: Disk, path: &[Point]) -> Result<()> {
    for w in path.windows(2) {
        for k in 1..64 {
            let t = k as f64 / 64.0;
            let p = add(w[0], sub(w[1], w[0]), t);
            if dist(p, d.center) < d.radius * (1.0 - 1e-9) {
                return Err(Error::Geometry(format!(
                    "path enters the disk at ({:.4}, {:.4})",
                    p[0], p[1]
                )));
            }
        }
    }
    Ok(())
}

/// Swap field: the disks `d1` and `d2` joined by a pipe along `path` (from
/// the boundary of `d1` to the boundary of `d2`) and a return pipe around
/// both. The field is 0 outside, `plateau` in the enclosed region and
/// linear across the tube, so its flow carries `d1` onto `d2` through the
/// first pipe in time about `A + w · length(path)`.
pub fn make_swap(
    d1: Disk,
    d2: Disk,
    path: &[Point],
    chart: PlanarChart,
    spec: &PipeSpec,
) -> Result<Construction> {
    swap_with_return(d1, d2, path, None, chart, spec)
}

/// Swap whose return pipe runs through `back`, the corners between the far
/// side of `d2` and the far side of `d1`. The disks are crossed along the
/// diameters through the ends of `path`, and the ring must turn
/// counterclockwise.
pub fn make_swap_via(
    d1: Disk,
    d2: Disk,
    path: &[Point],
    back: &[Point],
    chart: PlanarChart,
    spec: &PipeSpec,
) -> Result<Construction> {
    swap_with_return(d1, d2, path, Some(back), chart, spec)
}

fn swap_with_return(
    d1: Disk,
    d2: Disk,
    path: &[Point],
    back: Option<&[Point]>,
    chart: PlanarChart,
    spec: &PipeSpec,
) -> Result<Construction> {
    spec.validate()?;
    let r = d1.radius;
    if (d2.radius - r).abs() > 1e-9 * r {
        return Err(Error::Geometry(
            "the two disks must have the same area".into(),
        ));
    }
    if dist(d1.center, d2.center) <= 2.0 * (r + spec.margin) + spec.width {
        return Err(Error::Geometry("the disks overlap or touch".into()));
    }
    if path.len() < 2 || !on_boundary(d1, path[0]) || !on_boundary(d2, path[path.len() - 1]) {
        return Err(Error::Geometry(
            "the path must run from the boundary of the first disk to the second".into(),
        ));
    }
    avoid_interior(d1, path)?;
    avoid_interior(d2, path)?;
    let e1 = unit(sub(path[0], d1.center));
    let e2 = unit(sub(d2.center, path[path.len() - 1]));
    let rt = r + spec.margin;
    let (t1, t2) = (Disk::new(d1.center, rt), Disk::new(d2.center, rt));
    let first = add(d1.center, e1, rt);
    let last = add(d2.center, e2, -rt);
    let entry1 = add(d1.center, e1, -rt);
    let exit2 = add(d2.center, e2, rt);
    let g = spec.stub();

    let mut pts = alloc::vec![entry1, first];
    if !collinear(e1, first, path[1]) {
        pts.push(add(first, e1, g));
    }
    pts.extend_from_slice(&path[1..path.len() - 1]);
    if !collinear(e2, *pts.last().unwrap(), last) {
        pts.push(add(last, e2, -g));
    }
    let disk2 = pts.len();
    pts.push(last);
    pts.push(exit2);

    match back {
        Some(b) => pts.extend_from_slice(b),
        None => {
            let e = unit(sub(d2.center, d1.center));
            let f = [-e[1], e[0]];
            let height = |p: Point| dot(sub(p, d1.center), f);
            let top = path
                .iter()
                .map(|&p| height(p) + spec.half())
                .fold(rt, f64::max)
                + 1.5 * spec.width;
            let right = add(exit2, e2, g);
            let left = add(entry1, e1, -g);
            pts.push(right);
            pts.push(add(right, f, top - height(right)));
            pts.push(add(left, f, top - height(left)));
            pts.push(left);
        }
    }

    let corners: Vec<Waypoint> = pts
        .iter()
        .map(|&at| Waypoint {
            at,
            radius: spec.fillet,
        })
        .collect();
    let ring = Ring::new(
        &corners,
        &[(0, t1), (disk2, t2)],
        spec.half(),
        spec.smoothing,
        Hole::Plateau,
    )?;
    Construction::new(ring, chart, *spec, d1, d2)
}

/// Loop translation of `d`: a pipe along `route` from one end of a diameter
/// of `d` around to the other end. The enclosed region is filled with the
/// plateau near the tube and cut off to 0 further in, so the field is
/// supported near the disk and the pipe. After time about
/// `A + w · length(route)` the disk is back in place, having gone once
/// around the enclosed region counterclockwise.
pub fn make_loop_translation(
    d: Disk,
    route: &[Waypoint],
    chart: PlanarChart,
    spec: &PipeSpec,
) -> Result<Construction> {
    spec.validate()?;
    let n = route.len();
    if n < 3 {
        return Err(Error::Geometry(
            "a loop route needs at least three points".into(),
        ));
    }
    if !on_boundary(d, route[0].at) || !on_boundary(d, route[n - 1].at) {
        return Err(Error::Geometry(
            "the loop must start and end on the disk boundary".into(),
        ));
    }
    if dist(
        add(route[0].at, route[n - 1].at, 1.0),
        add(d.center, d.center, 1.0),
    ) > 1e-9 * (1.0 + d.radius)
    {
        return Err(Error::Geometry(
            "the loop must join the two ends of a diameter".into(),
        ));
    }
    let pts: Vec<Point> = route.iter().map(|w| w.at).collect();
    avoid_interior(d, &pts)?;
    let e = unit(sub(route[0].at, d.center));
    let tube = Disk::new(d.center, d.radius + spec.margin);
    let exit = add(d.center, e, tube.radius);
    let entry = add(d.center, e, -tube.radius);
    let g = spec.stub();
    let mut corners = alloc::vec![
        Waypoint {
            at: entry,
            radius: spec.fillet
        },
        Waypoint {
            at: exit,
            radius: route[0].radius
        }
    ];
    if !collinear(e, exit, route[1].at) {
        corners.push(Waypoint {
            at: add(exit, e, g),
            radius: spec.fillet,
        });
    }
    corners.extend_from_slice(&route[1..n - 1]);
    if !collinear(e, route[n - 2].at, entry) {
        corners.push(Waypoint {
            at: add(entry, e, -g),
            radius: spec.fillet,
        });
    }
    let (start, end) = spec.cutoff();
    let ring = Ring::new(
        &corners,
        &[(0, tube)],
        spec.half(),
        spec.smoothing,
        Hole::Cutoff { start, end },
    )?;
    Construction::new(ring, chart, *spec, d, d)
}

/// Route for a loop translation of `d` around the punctures flagged in
/// `enclosed`; all punctures must lie above the disk. The pipe leaves the
/// right end of the horizontal diameter, rises past the punctures, runs
/// back above them dipping below the excluded ones, and returns to the left
/// end.
pub fn loop_route(
    d: Disk,
    punctures: &[Point],
    enclosed: &[bool],
    spec: &PipeSpec,
) -> Result<Vec<Waypoint>> {
    if punctures.len() != enclosed.len() {
        return Err(Error::Geometry("one flag per puncture".into()));
    }
    if !enclosed.iter().any(|&b| b) {
        return Err(Error::Geometry(
            "a loop must enclose at least one puncture".into(),
        ));
    }
    let [cx, cy] = d.center;
    let r = d.radius + spec.margin;
    let (hw, fil, q) = (spec.half(), spec.fillet, spec.clearance());
    let reach = q + hw;
    let too_low = |p: &Point, floor: f64| {
        Error::Geometry(format!(
            "puncture ({:.4}, {:.4}) is below {floor:.4}, too close to the disk",
            p[0], p[1]
        ))
    };
    let floor = cy + r + q;
    if let Some(p) = punctures.iter().find(|p| p[1] < floor) {
        return Err(too_low(p, floor));
    }
    let excluded: Vec<Point> = punctures
        .iter()
        .zip(enclosed)
        .filter(|(_, &inside)| !inside)
        .map(|(p, _)| *p)
        .collect();
    let floor = floor + q + 2.0 * hw;
    if let Some(p) = excluded.iter().find(|p| p[1] - reach < floor - reach) {
        return Err(too_low(p, floor));
    }
    let y_lo = excluded
        .iter()
        .map(|p| p[1] - reach)
        .fold(f64::INFINITY, f64::min);
    let mut y_hi = punctures
        .iter()
        .map(|p| p[1])
        .fold(f64::NEG_INFINITY, f64::max)
        + reach;
    if !excluded.is_empty() {
        y_hi = y_hi.max(y_lo + spec.run());
    }
    let mut dips: Vec<(f64, f64)> = excluded
        .iter()
        .map(|p| (p[0] - spec.dip(), p[0] + spec.dip()))
        .collect();
    dips.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in dips {
        match merged.last_mut() {
            Some(m) if hi > m.0 - spec.run() => m.0 = m.0.min(lo),
            _ => merged.push((lo, hi)),
        }
    }
    let xs = punctures.iter().map(|p| p[0]);
    let stub = fil + 0.25 * spec.width;
    let x_r = xs
        .clone()
        .map(|x| x + reach)
        .chain(merged.iter().map(|m| m.1 + spec.run()))
        .fold(cx + r + stub, f64::max);
    let x_l = xs
        .map(|x| x - reach)
        .chain(merged.iter().map(|m| m.0 - spec.run()))
        .fold(cx - r - stub, f64::min);
    let wp = |x: f64, y: f64| Waypoint {
        at: [x, y],
        radius: fil,
    };
    let mut route = alloc::vec![wp(cx + d.radius, cy), wp(x_r, cy), wp(x_r, y_hi)];
    for &(lo, hi) in &merged {
        route.push(wp(hi, y_hi));
        route.push(wp(hi, y_lo));
        route.push(wp(lo, y_lo));
        route.push(wp(lo, y_hi));
    }
    route.push(wp(x_l, y_hi));
    route.push(wp(x_l, cy));
    route.push(wp(cx - d.radius, cy));
    if merged.is_empty() {
        // round the two upper corners as far as the punctures allow
        let clear = |rad: f64| {
            punctures.iter().all(|p| {
                [[x_r - rad, y_hi - rad], [x_l + rad, y_hi - rad]]
                    .iter()
                    .enumerate()
                    .all(|(k, c)| {
                        let beyond = if k == 0 { p[0] > c[0] } else { p[0] < c[0] };
                        !(beyond && p[1] > c[1]) || rad - dist(*p, *c) >= reach
                    })
            })
        };
        let top = (y_hi - cy - fil - 0.25 * spec.width).min(0.5 * (x_r - x_l) - spec.width);
        if let Some(rad) = (0..16)
            .map(|k| top - (top - fil) * k as f64 / 16.0)
            .find(|&rad| rad > fil && clear(rad))
        {
            route[2].radius = rad;
            route[3].radius = rad;
        }
    }
    Ok(route)
}

/// Checks that the flagged punctures lie in the cut-off part of the
/// enclosed region and the others outside the support.
pub fn check_punctures(c: &Construction, punctures: &[Point], enclosed: &[bool]) -> Result<()> {
    let (_, end) = c.spec.cutoff();
    let g = c.chart.grid();
    let cell = hypot(g.dx(), g.dy());
    for (j, (&p, &inside)) in punctures.iter().zip(enclosed).enumerate() {
        let d = c.distance_to_tube(p);
        let ok = if inside {
            c.encloses(p) && d >= end + cell
        } else {
            !c.encloses(p) && d >= cell
        };
        if !ok {
            return Err(Error::Geometry(format!(
                "puncture {j} at ({:.4}, {:.4}) is not clear of the pipes",
                p[0], p[1]
            )));
        }
    }
    Ok(())
}

/// Chart around the box `[x0, x1] x [y0, y1]` padded by `pad`.
pub(crate) fn chart_around(b: [f64; 4], pad: f64, n: usize) -> PlanarChart {
    PlanarChart::covering(b[0] - pad, b[1] + pad, b[2] - pad, b[3] + pad, n, 0.0)
}

/// Layout used by the default swap of two disks of area `a`: centers on the
/// `x` axis with a gap of 0.1, a straight first pipe and the return pipe
/// above. The pipe width is 2% of the chart diameter.
pub fn default_swap(a: f64, grid: usize) -> Result<Construction> {
    default_swap_with(a, grid, 1.0)
}

/// [`default_swap`] on the default chart with the pipe width scaled by
/// `factor`.
pub fn default_swap_with(a: f64, grid: usize, factor: f64) -> Result<Construction> {
    let r = libm::sqrt(a / core::f64::consts::PI);
    let c = r + 0.05;
    let bbox = |w: f64| {
        let spec = PipeSpec::with_width(w);
        let rt = r + spec.margin;
        let xr = c + rt + spec.stub() + spec.width;
        [-xr, xr, -rt - w, rt + 2.5 * w + w]
    };
    let chart = sized_chart(bbox, grid);
    let (chart, spec) = aligned(chart, factor * PipeSpec::for_chart(&chart).width, 0.0);
    let d1 = Disk::new([-c, 0.0], r);
    let d2 = Disk::new([c, 0.0], r);
    make_swap(d1, d2, &[[-c + r, 0.0], [c - r, 0.0]], chart, &spec)
}

/// Re-grids `chart` with square cells and rounds `width` to a whole number
/// of cells, placing rows on both edges of a horizontal pipe centered at
/// height `mid`. Sampling is then exact across straight pipes.
pub(crate) fn aligned(chart: PlanarChart, width: f64, mid: f64) -> (PlanarChart, PipeSpec) {
    let h = chart.width / chart.nx as f64;
    let h = h.max(chart.height / chart.ny as f64);
    let w = libm::round(width / h).max(2.0) * h;
    let edge = mid - 0.5 * w;
    let y0 = edge - libm::ceil((edge - chart.y0) / h) * h;
    let nx = libm::ceil(chart.width / h) as usize;
    let ny = libm::ceil((chart.y0 + chart.height - y0) / h) as usize;
    let out = PlanarChart {
        x0: chart.x0,
        y0,
        width: nx as f64 * h,
        height: ny as f64 * h,
        nx,
        ny,
        collar: chart.collar,
    };
    (out, PipeSpec::with_width(w))
}

/// Finds the chart whose diameter is 50 pipe widths for a layout with
/// bounding box `bbox(w)`, padded by one width.
pub(crate) fn sized_chart(bbox: impl Fn(f64) -> [f64; 4], grid: usize) -> PlanarChart {
    let mut w = 0.02;
    let mut chart = chart_around(bbox(w), w, grid);
    for _ in 0..50 {
        let next = 0.02 * chart.grid().diameter();
        if (next - w).abs() < 1e-12 {
            break;
        }
        w = next;
        chart = chart_around(bbox(w), w, grid);
    }
    chart
}

/// Disk of area `a` at the origin with `k` punctures in a row above it,
/// spaced for loop routes, on a chart sized so that the pipe width is 2% of
/// its diameter.
pub fn puncture_layout(a: f64, k: usize, grid: usize) -> (Disk, Vec<Point>, PlanarChart, PipeSpec) {
    let r = libm::sqrt(a / core::f64::consts::PI);
    let place = |w: f64| {
        let spec = PipeSpec::with_width(w);
        let (q, hw) = (spec.clearance(), spec.half());
        let mut y = r + spec.margin + q;
        if k > 1 {
            y += q + 2.0 * hw;
        }
        let step = 2.0 * spec.dip() + spec.run() + 0.5 * w;
        let pts: Vec<Point> = (0..k)
            .map(|j| [(j as f64 - 0.5 * (k as f64 - 1.0)) * step, y])
            .collect();
        (spec, pts)
    };
    let bbox = |w: f64| {
        let (spec, pts) = place(w);
        let hw = spec.half();
        let side = pts.iter().map(|p| p[0].abs()).fold(0.0, f64::max) + spec.dip() + spec.run();
        let xr = side.max(r + spec.margin + spec.fillet + 0.25 * w) + hw;
        let top = pts[0][1] + spec.clearance() + hw + if k > 1 { 0.5 * w } else { 0.0 };
        [-xr, xr, -r - spec.margin, top + hw]
    };
    let chart = sized_chart(bbox, grid);
    let spec = PipeSpec::for_chart(&chart);
    let (_, pts) = place(spec.width);
    (Disk::new([0.0, 0.0], r), pts, chart, spec)
}

/// Loop translation of a disk of area `a` around a single puncture placed
/// just above it.
pub fn default_loop(a: f64, grid: usize) -> Result<(Construction, Point)> {
    let (d, pts, chart, spec) = puncture_layout(a, 1, grid);
    let route = loop_route(d, &pts, &[true], &spec)?;
    let c = make_loop_translation(d, &route, chart, &spec)?;
    check_punctures(&c, &pts, &[true])?;
    Ok((c, pts[0]))
}

/// Two swaps of disks of area `a` centered on the `x` axis, with a puncture
/// between them below the axis. The first carries the left disk to the right
/// one along the axis. The second carries it back along a pipe passing
/// below the puncture, so the pair moves the left disk once clockwise
/// around it.
pub fn two_pipe_swaps(a: f64, grid: usize) -> Result<(Construction, Construction, Point)> {
    let r = libm::sqrt(a / core::f64::consts::PI);
    let place = |w: f64| {
        let spec = PipeSpec::with_width(w);
        let rt = r + spec.margin;
        let c = rt + spec.half() + 2.0 * w;
        let g = spec.stub();
        (spec, rt, c, g)
    };
    let bbox = |w: f64| {
        let (spec, rt, c, g) = place(w);
        let hw = spec.half();
        let xr = c + rt + g + hw;
        [-xr, xr, -rt - g - 2.5 * w - hw, rt + g + hw]
    };
    let chart = sized_chart(bbox, grid);
    let (chart, spec) = aligned(chart, PipeSpec::for_chart(&chart).width, 0.0);
    let (_, rt, c, g) = place(spec.width);
    let d1 = Disk::new([-c, 0.0], r);
    let d2 = Disk::new([c, 0.0], r);
    let puncture = [0.0, -0.5 * r];

    let there = make_swap(d1, d2, &[[-c + r, 0.0], [c - r, 0.0]], chart, &spec)?;
    let cell = chart.width / chart.nx as f64;
    let low = -libm::ceil((rt + g) / cell) * cell;
    let path = [[c, -r], [c, low], [-c, low], [-c, -r]];
    let (xl, xr, bottom, high) = (-c - rt - g, c + rt + g, low - 2.5 * spec.width, rt + g);
    let back = [
        [-c, high],
        [xl, high],
        [xl, bottom],
        [xr, bottom],
        [xr, high],
        [c, high],
    ];
    let home = make_swap_via(d2, d1, &path, &back, chart, &spec)?;
    check_punctures(&there, &[puncture], &[false])?;
    check_punctures(&home, &[puncture], &[false])?;
    Ok((there, home, puncture))
}
