//! The acceptance suite shared by `hofer verify` and the `acceptance` test
//! target.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::{PI, TAU};

use hofer_core::constructions::{
    calibrate_transport_time, default_loop, default_swap_with, make_puncture_shift,
    schedule_for_class, CalibrationOptions, ShiftProfile,
};
use hofer_core::flow::{
    flux_through_cut, hofer_energy, integrate_flow, trajectory_class, verify_transport,
    IntegratorOptions, TransportOptions,
};
use hofer_core::geometry::{
    build_sphere, parse_field_expression, AnnulusChart, Chart, Disk, Expression, PlanarChart,
    Point, SamplingOptions, ScalarField, StarChart, SurfaceSpec,
};
use hofer_core::homology::{
    annulus_upper, decompose_genus_g, decompose_punctured_torus, decompose_torus, gcd, is_simple,
    l_a_bounds, simple_loops_genus0, word_length_genus0, Basis, H1Class,
};
use hofer_core::reeb::{
    build_contour_tree, find_median, rho_raw, rho_vector, MeasuredReebTree, MedianLocation,
    ReebOptions, DEFAULT_SLABS,
};
use hofer_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "rho on the shift"),
    (2, "rho on profiles"),
    (3, "rho vanishes on disk bumps"),
    (4, "median law"),
    (5, "Lipschitz bound"),
    (6, "independence probe"),
    (7, "transport"),
    (8, "flux and area"),
    (9, "norm oracle and decompositions"),
    (10, "bound sandwich"),
    (11, "rho vector against winding"),
];

pub fn title(id: u8) -> Option<&'static str> {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        let mark = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "criterion {:>2} {mark} {}: {}",
            self.id, self.title, self.detail
        )
    }
}

struct Check {
    pass: bool,
    detail: String,
}

/// Runs criterion `id`; randomized criteria draw from `seed`.
///
/// # Panics
/// If `id` is not in [`CRITERIA`].
pub fn run(id: u8, seed: u64) -> Outcome {
    let title = title(id).expect("known criterion");
    let r = match id {
        1 => shift_rho(),
        2 => profiles(),
        3 => disk_bumps(),
        4 => medians(seed),
        5 => lipschitz(seed),
        6 => independence(),
        7 => transport(),
        8 => flux(seed),
        9 => norms(seed),
        10 => sandwich(),
        _ => cross_check(),
    };
    let (pass, detail) = match r {
        Ok(c) => (c.pass, c.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

fn annulus(expr: &str, n: usize) -> Result<ScalarField> {
    let chart = Chart::Annulus(AnnulusChart::with_resolution(n));
    parse_field_expression(expr, &chart, SamplingOptions::default())
}

fn opts(grid: usize) -> ReebOptions {
    ReebOptions {
        slabs: DEFAULT_SLABS,
        grid,
    }
}

fn relative(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn shift_rho() -> Result<Check> {
    let h = annulus("h", 512)?;
    let mut worst: f64 = 0.0;
    for a in [0.6, 0.75, 0.9] {
        let top = 2.0 * a - 1.0;
        for (s1, s2) in [(0.0, top), (0.25 * top, 0.75 * top), (0.5 * top, top)] {
            let got = rho_raw(&h, a, s1, s2, &opts(512))?;
            worst = worst.max(relative(got, 2.0 * a * (s2 - s1)));
        }
    }
    Ok(Check {
        pass: worst <= 0.01,
        detail: format!("9 cases at 512, worst relative error {worst:.2e}"),
    })
}

fn profiles() -> Result<Check> {
    let (a, s1, s2) = (0.75, 0.0, 0.5);
    let set = [
        "max(0, 1-(h-0.6)*(h-0.6)/0.09)",
        "6.75*h*h*(1-h)",
        "sin(pi*h*h)",
    ];
    let mut worst: f64 = 0.0;
    for expr in set {
        let e = Expression::parse(expr)?;
        let want = 2.0 * a * (e.eval(0.0, a - s1, 0.0) - e.eval(0.0, a - s2, 0.0));
        let got = rho_raw(&annulus(expr, 512)?, a, s1, s2, &opts(512))?;
        worst = worst.max(relative(got, want));
    }
    Ok(Check {
        pass: worst <= 0.01,
        detail: format!("3 profiles at 512, worst relative error {worst:.2e}"),
    })
}

fn bump_expr(c: Point, rho: f64, height: f64) -> String {
    let r2 = format!(
        "((θ-{x})*(θ-{x})+(h-{y})*(h-{y}))/{rr}",
        x = c[0],
        y = c[1],
        rr = rho * rho
    );
    format!("{height}*max(0, 1-{r2})*max(0, 1-{r2})")
}

fn disk_bumps() -> Result<Check> {
    let bumps = [
        ([0.4, 0.5], 0.2, 1.0),
        ([0.2, 0.3], 0.15, -2.0),
        ([0.7, 0.7], 0.1, 0.5),
        ([0.5, 0.2], 0.12, 3.0),
        ([0.3, 0.75], 0.2, -0.7),
    ];
    let mut worst: f64 = 0.0;
    for (c, rho, height) in bumps {
        let h = annulus(&bump_expr(c, rho, height), 256)?;
        let (lo, hi) = h.extrema_at(0.0);
        for (a, s1, s2) in [(0.75, 0.0, 0.5), (0.9, 0.2, 0.6)] {
            let r = rho_raw(&h, a, s1, s2, &opts(256))?;
            worst = worst.max(r.abs() / (hi - lo));
        }
    }
    Ok(Check {
        pass: worst <= 1e-2,
        detail: format!("5 bumps, worst |rho| / oscillation {worst:.2e}"),
    })
}

/// Largest component measure of the tree minus a node (`Ok(v)`) or minus
/// the point at a level on an arc (`Err((arc, level))`), by traversal.
fn components(tree: &MeasuredReebTree, cut: std::result::Result<usize, (usize, f64)>) -> f64 {
    let nodes = tree.nodes();
    let mut seen = vec![false; nodes.len()];
    let mut starts = Vec::new();
    let mut cut_arc = None;
    match cut {
        Ok(v) => {
            seen[v] = true;
            for &e in tree.incident(v) {
                let a = &tree.arcs()[e];
                starts.push((if a.lo == v { a.hi } else { a.lo }, a.measure()));
            }
        }
        Err((e, level)) => {
            let a = &tree.arcs()[e];
            let below = a.cumulative(level);
            starts.push((a.lo, below));
            starts.push((a.hi, a.measure() - below));
            cut_arc = Some(e);
        }
    }
    let mut best: f64 = 0.0;
    for (s, init) in starts {
        if seen[s] {
            continue;
        }
        let mut sum = init;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            sum += nodes[v].atom;
            for &e in tree.incident(v) {
                if Some(e) == cut_arc {
                    continue;
                }
                let a = &tree.arcs()[e];
                let w = if a.lo == v { a.hi } else { a.lo };
                if !seen[w] {
                    seen[w] = true;
                    sum += a.measure();
                    stack.push(w);
                }
            }
        }
        best = best.max(sum);
    }
    best
}

/// Whether the median bounds every component by half the measure and no
/// node or slab point does better.
fn scan_median(tree: &MeasuredReebTree) -> Result<bool> {
    let m = find_median(tree)?;
    let total = tree.total_measure();
    let tol = 1e-9 * total;
    let at = match m.location {
        MedianLocation::Node(v) => components(tree, Ok(v)),
        MedianLocation::Arc { arc, level } => components(tree, Err((arc, level))),
    };
    if at > 0.5 * total + tol || (at - m.max_component).abs() > tol {
        return Ok(false);
    }
    for v in 0..tree.nodes().len() {
        if components(tree, Ok(v)) < at - tol {
            return Ok(false);
        }
    }
    for (e, arc) in tree.arcs().iter().enumerate() {
        let (lo, hi) = arc.levels();
        let n = arc.table().len().max(2) - 1;
        for k in 1..n {
            let l = lo + (hi - lo) * k as f64 / n as f64;
            if components(tree, Err((e, l))) < at - tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn medians(seed: u64) -> Result<Check> {
    let h = annulus("h", 256)?;
    let mut level_err: f64 = 0.0;
    let mut scanned = 0;
    let mut pass = true;
    for (a, s) in [
        (0.6, 0.0),
        (0.6, 0.15),
        (0.75, 0.2),
        (0.9, 0.05),
        (0.9, 0.7),
    ] {
        let tree = build_contour_tree(&build_sphere(&h, s, a)?, DEFAULT_SLABS)?;
        level_err = level_err.max((find_median(&tree)?.value - (a - s)).abs());
        pass &= scan_median(&tree)?;
        scanned += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut others = vec![
        annulus(
            &format!(
                "{}+{}",
                bump_expr([0.27, 0.5], 0.2, 1.0),
                bump_expr([0.73, 0.5], 0.15, 0.5)
            ),
            128,
        )?,
        annulus(
            "16*(max(0, θ*(0.5-θ)) + max(0, (θ-0.5)*(1-θ)))*sin(pi*h)",
            128,
        )?,
    ];
    for _ in 0..4 {
        others.push(random_field(&mut rng, 48));
    }
    for f in &others {
        let a = rng.gen_range(0.55..0.95);
        let s = rng.gen_range(0.0..2.0 * a - 1.0);
        let tree = build_contour_tree(&build_sphere(f, s, a)?, DEFAULT_SLABS)?;
        pass &= scan_median(&tree)?;
        scanned += 1;
    }
    Ok(Check {
        pass: pass && level_err <= 1e-3,
        detail: format!(
            "{scanned} medians scanned, all minimal: {pass}; shift level error {level_err:.2e}"
        ),
    })
}

/// Sum of 1 to 3 modes `a sin(2π(mθ + φ)) sin(π l h)` with the collar cutoff.
fn random_field(rng: &mut ChaCha8Rng, n: usize) -> ScalarField {
    let count = rng.gen_range(1..4);
    let modes: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0..4) as f64,
                rng.gen_range(1..4) as f64,
                rng.gen_range(0.0..1.0),
            )
        })
        .collect();
    let chart = Chart::Annulus(AnnulusChart::with_resolution(n));
    ScalarField::from_fn_autonomous(chart.grid(), |x, y| {
        let v: f64 = modes
            .iter()
            .map(|&(a, m, l, phi)| a * (TAU * (m * x + phi)).sin() * (PI * l * y).sin())
            .sum();
        v * chart.cutoff([x, y])
    })
    .expect("finite samples")
}

fn lipschitz(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let h = random_field(&mut rng, 48);
        let a = rng.gen_range(0.55..0.95);
        let top = 2.0 * a - 1.0;
        let s1 = rng.gen_range(0.0..0.5 * top);
        let s2 = rng.gen_range(s1 + 0.1 * (top - s1)..=top);
        let (lo, hi) = h.extrema_at(0.0);
        let r = rho_raw(&h, a, s1, s2, &opts(48))?;
        let ratio = r.abs() / (4.0 * a * (hi - lo)).max(f64::MIN_POSITIVE);
        worst = worst.max(ratio);
        if ratio > 1.0 {
            violations += 1;
        }
    }
    Ok(Check {
        pass: violations == 0,
        detail: format!(
            "100 random fields, {violations} violations, worst |rho| / 4A osc {worst:.3}"
        ),
    })
}

fn independence() -> Result<Check> {
    let a = 0.9;
    let centers = [0.25, 0.5, 0.75];
    let s2s = [0.65, 0.4, 0.15];
    let mut m = [[0.0; 3]; 3];
    for (i, c) in centers.iter().enumerate() {
        let h = annulus(&format!("max(0, 1-(h-{c})*(h-{c})/0.01)"), 256)?;
        for (j, &s2) in s2s.iter().enumerate() {
            m[i][j] = rho_raw(&h, a, 0.0, s2, &opts(256))?;
        }
    }
    let kappa = condition(&m);
    Ok(Check {
        pass: kappa.is_finite() && kappa <= 1e3,
        detail: format!("3x3 matrix, Frobenius condition number {kappa:.3}"),
    })
}

/// `‖M‖ ‖M⁻¹‖` in the Frobenius norm; infinite when singular.
fn condition(m: &[[f64; 3]; 3]) -> f64 {
    let cof = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let det: f64 = (0..3).map(|j| m[0][j] * cof(0, j)).sum();
    let norm = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if det.abs() <= f64::EPSILON * norm.powi(3) {
        return f64::INFINITY;
    }
    let inv = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (cof(j, i) / det).powi(2))
        .sum::<f64>()
        .sqrt();
    norm * inv
}

fn transport() -> Result<Check> {
    let (a, n) = (0.2, 512);
    let cal_opts = CalibrationOptions::default();
    let window = (0.5 * a, 2.0 * a);
    let cap = a + 0.15 * a;
    let mut excess = Vec::new();
    let mut swap_energy = 0.0;
    let mut swap_mismatch = 0.0;
    for factor in [1.0, 0.5, 0.25] {
        let c = default_swap_with(a, n, factor)?;
        let cal = calibrate_transport_time(&c.field, c.source, c.target, window, &cal_opts)?;
        if factor == 1.0 {
            swap_energy = hofer_energy(&c.field, cal.time)?;
            swap_mismatch = cal.relative_mismatch;
        }
        excess.push(cal.time - a);
    }
    let (c, p) = default_loop(a, n)?;
    let cal = calibrate_transport_time(&c.field, c.source, c.source, window, &cal_opts)?;
    let loop_energy = hofer_energy(&c.field, cal.time)?;
    let tr = integrate_flow(
        &c.field,
        c.source.center,
        cal.time,
        &IntegratorOptions::default(),
    )?;
    let w = trajectory_class(&tr, &[p], c.source)?;
    let trend = excess.windows(2).all(|x| x[1] < x[0]);
    let pass = swap_mismatch <= 0.05
        && swap_energy <= cap
        && cal.relative_mismatch <= 0.05
        && loop_energy <= cap
        && w.windings == [1]
        && trend;
    Ok(Check {
        pass,
        detail: format!(
            "swap energy {swap_energy:.4} mismatch {:.2}%; loop energy {loop_energy:.4} mismatch {:.2}% winding {:?}; excess over widths 1, 1/2, 1/4: {:.4}, {:.4}, {:.4}",
            100.0 * swap_mismatch,
            100.0 * cal.relative_mismatch,
            w.windings,
            excess[0],
            excess[1],
            excess[2]
        ),
    })
}

fn flux(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let h = random_field(&mut rng, 48);
        let k = rng.gen_range(2..5);
        let cut: Vec<Point> = (0..k)
            .map(|_| [rng.gen_range(-0.5..1.5), rng.gen_range(0.02..0.98)])
            .collect();
        let f = flux_through_cut(&h, &cut, 0.0)?;
        let ends = |p: Point| h.value(p, 0.0).unwrap_or(f64::NAN);
        let want = ends(cut[0]) - ends(cut[k - 1]);
        worst = worst.max((f - want).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let h = random_field(&mut rng, 256);
    let d = Disk::new([0.5, 0.5], 0.15);
    let fine = TransportOptions {
        probe: 512,
        max_boundary_samples: 16384,
        ..TransportOptions::default()
    };
    let rep = verify_transport(&h, d, d, 0.5, 1.0, &fine)?;
    Ok(Check {
        pass: worst <= 1e-3 && rep.resolved && rep.area_drift <= 0.01,
        detail: format!(
            "100 cuts, worst flux error {worst:.2e}; area drift {:.2e} over {} boundary samples, resolved: {}",
            rep.area_drift, rep.boundary_samples, rep.resolved
        ),
    })
}

fn bfs_lengths(k: usize, r: i64) -> HashMap<Vec<i64>, u64> {
    let gens: Vec<Vec<i64>> = (1..1u32 << k)
        .flat_map(|mask| {
            let v: Vec<i64> = (0..k).map(|j| ((mask >> j) & 1) as i64).collect();
            let w: Vec<i64> = v.iter().map(|x| -x).collect();
            [v, w]
        })
        .collect();
    let mut dist = HashMap::from([(vec![0; k], 0)]);
    let mut queue = VecDeque::from([vec![0; k]]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for g in &gens {
            let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| a + b).collect();
            if w.iter().all(|x| x.abs() <= r) && !dist.contains_key(&w) {
                dist.insert(w.clone(), d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn primitive(c: &[i64]) -> bool {
    c.iter().fold(0, |g, &x| gcd(g, x)) == 1
}

fn summed(p: &H1Class, q: &H1Class) -> Vec<i64> {
    p.coefficients()
        .iter()
        .zip(q.coefficients())
        .map(|(x, y)| x + y)
        .collect()
}

fn norms(seed: u64) -> Result<Check> {
    let mut mismatches = 0;
    let mut boxed = 0;
    for k in 1..=3 {
        for (v, &d) in &bfs_lengths(k, 6) {
            if v.iter().all(|x| x.abs() <= 3) {
                boxed += 1;
                if word_length_genus0(&H1Class::genus0(v.clone()))? != d {
                    mismatches += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for i in 0..1000 {
        let ok = match i % 4 {
            0 => {
                let k = rng.gen_range(1..6);
                let c: Vec<i64> = (0..k).map(|_| rng.gen_range(-9..10)).collect();
                let alpha = H1Class::genus0(c.clone());
                let loops = simple_loops_genus0(&alpha)?;
                let mut sum = vec![0; k];
                let mut simple = true;
                for (sign, set) in &loops {
                    let v: Vec<i64> = set.iter().map(|&b| sign * b as i64).collect();
                    simple &= is_simple(&H1Class::genus0(v.clone())) == Some(true);
                    sum.iter_mut().zip(&v).for_each(|(s, x)| *s += x);
                }
                sum == c && simple && loops.len() as u64 == word_length_genus0(&alpha)?
            }
            1 => {
                let (n, m) = (rng.gen_range(-50..50), rng.gen_range(-50..50));
                let (p, q) = decompose_torus(&H1Class::torus(n, m))?;
                let parts_ok = [&p, &q]
                    .iter()
                    .all(|x| x.is_zero() || is_simple(x) == Some(true));
                summed(&p, &q) == [n, m] && parts_ok
            }
            2 => {
                let k = rng.gen_range(1..5);
                let c: Vec<i64> = (0..=k).map(|_| rng.gen_range(-9..10)).collect();
                let alpha = H1Class::new(Basis::PuncturedTorus { punctures: k }, c.clone())?;
                let (p, q) = decompose_punctured_torus(&alpha)?;
                summed(&p, &q) == c && primitive(p.coefficients()) && primitive(q.coefficients())
            }
            _ => {
                let blocks: Vec<usize> = (0..rng.gen_range(1..4))
                    .map(|_| rng.gen_range(1..4))
                    .collect();
                let rank = blocks.iter().map(|b| b + 1).sum();
                let c: Vec<i64> = (0..rank).map(|_| rng.gen_range(-9..10)).collect();
                let alpha = H1Class::new(Basis::GenusG { blocks }, c.clone())?;
                let (p, q) = decompose_genus_g(&alpha)?;
                summed(&p, &q) == c && primitive(p.coefficients()) && primitive(q.coefficients())
            }
        };
        if !ok {
            failures += 1;
        }
    }
    Ok(Check {
        pass: mismatches == 0 && boxed == 7 + 49 + 343 && failures == 0,
        detail: format!(
            "{boxed} classes against BFS, {mismatches} mismatches; 1000 decompositions, {failures} failures"
        ),
    })
}

fn sandwich() -> Result<Check> {
    let a = 0.75;
    let surface = SurfaceSpec::annulus(1.0)?;
    let alpha = H1Class::new(Basis::for_surface(&surface)?, vec![1])?;
    let report = l_a_bounds(&surface, a, &alpha, None)?;
    let refined = annulus_upper(surface.area, a, 1);
    let stable = report.conjectured_stable.unwrap_or(f64::NAN);
    let s = schedule_for_class(
        a,
        &H1Class::genus0(vec![1]),
        512,
        &CalibrationOptions::default(),
    )?;
    let measured = s.energy()?;
    let w = s.class(&IntegratorOptions::default())?;
    let lower = report.lower.value;
    let pass = (lower - 0.75).abs() < 1e-12
        && (refined - 1.5).abs() < 1e-12
        && measured <= stable + 0.15 * a
        && lower <= measured
        && measured <= refined
        && w.windings == [1];
    Ok(Check {
        pass,
        detail: format!(
            "lower {lower} <= measured {measured:.4} <= refinement {refined}; A|α| + 0.15A = {:.4}; winding {:?}",
            stable + 0.15 * a,
            w.windings
        ),
    })
}

fn cross_check() -> Result<Check> {
    let domain = Disk::with_area([0.0, 0.0], 1.0);
    let p = [[-0.25, 0.0], [0.45, 0.0]];
    let r = domain.radius + 0.01;
    let chart = PlanarChart::covering(-r, r, -r, r, 512, 0.0);
    let profile = ShiftProfile {
        start: 0.35,
        full: 0.5,
        fade_start: 0.9,
        fade_end: 0.97,
    };
    let h = make_puncture_shift(chart, domain, p[0], profile)?;
    let rho = rho_vector(&h, domain, &p, 0.9, 0.1, 0.3, &opts(256))?;
    let c = StarChart::new(domain, p[0])?.from_annulus([0.1, 0.7]);
    let tr = integrate_flow(&h, c, 1.0, &IntegratorOptions::default())?;
    let w = trajectory_class(&tr, &p, Disk::new(c, 0.01))?;
    let gap = rho
        .iter()
        .zip(&w.windings)
        .map(|(x, &n)| (x - n as f64).abs())
        .fold(0.0, f64::max);
    Ok(Check {
        pass: w.windings == [1, 0] && gap < 0.05,
        detail: format!(
            "rho vector ({:.4}, {:.4}), winding {:?}, largest gap {gap:.2e}",
            rho[0], rho[1], w.windings
        ),
    })
}
