use hofer_core::constructions::{
    calibrate_transport_time, default_loop, default_swap, make_loop_translation, puncture_layout,
    schedule_for_class, two_pipe_schedule, two_pipe_swaps, CalibrationOptions, Construction,
    Schedule, Waypoint,
};
use hofer_core::flow::{flux_through_cut, hofer_energy, trajectory_class, IntegratorOptions};
use hofer_core::geometry::{Disk, PlanarChart, Point, ScalarField};
use hofer_core::homology::H1Class;
use hofer_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

const GRID: usize = 256;

fn nodes(c: &Construction) -> impl Iterator<Item = (Point, f64)> + '_ {
    let g = c.field.grid();
    let s = c.field.samples();
    (0..g.rows()).flat_map(move |j| (0..g.columns()).map(move |i| (g.node(i, j), s[g.index(i, j)])))
}

fn window(a: f64) -> (f64, f64) {
    (0.5 * a, 2.0 * a)
}

#[test]
fn swap_field_runs_from_zero_to_one() {
    let c = default_swap(0.2, GRID).unwrap();
    let (lo, hi) = c.field.extrema_at(0.0);
    assert_eq!(lo, 0.0);
    assert_eq!(hi, 1.0);
}

#[test]
fn swap_field_vanishes_outside_its_support() {
    let c = default_swap(0.2, GRID).unwrap();
    let mut inside = 0;
    for (p, v) in nodes(&c) {
        if c.support_contains(p) {
            inside += 1;
        } else {
            assert_eq!(v, 0.0, "nonzero at {p:?}");
        }
    }
    assert!(inside > 0);
}

#[test]
fn swap_support_area_matches_the_geometry() {
    let c = default_swap(0.2, GRID).unwrap();
    let rt = c.source.radius + c.spec.margin;
    let tube = 2.0 * PI * rt * rt + c.spec.width * c.pipe_length;
    assert!(
        (c.tube_area - tube).abs() < 0.02 * tube,
        "tube {} vs {tube}",
        c.tube_area
    );
    let g = c.field.grid();
    let counted = nodes(&c).filter(|&(_, v)| v != 0.0).count() as f64 * g.cell_area();
    assert!(
        (counted - c.support_area).abs() < 0.03 * c.support_area,
        "counted {counted} vs {}",
        c.support_area
    );
    assert!(c.support_area <= tube + c.hole_area + 0.02 * tube);
}

#[test]
fn flux_into_the_plateau_is_one() {
    let c = default_swap(0.2, GRID).unwrap();
    let g = c.field.grid();
    let w = c.spec.width;
    let (a, _) = nodes(&c)
        .filter(|&(p, v)| v == 1.0 && c.encloses(p) && c.distance_to_tube(p) > w && p[0].abs() < w)
        .min_by(|x, y| x.0[1].partial_cmp(&y.0[1]).unwrap())
        .expect("a node on the plateau");
    let mut b = a;
    while c.support_contains(b) || c.distance_to_tube(b) < w {
        b[1] += g.dy();
    }
    let flux = flux_through_cut(&c.field, &[a, b], 0.0).unwrap();
    assert!((flux - 1.0).abs() < 1e-3, "flux {flux}");
}

#[test]
fn swap_moves_the_disk_for_about_its_area() {
    let c = default_swap(0.2, GRID).unwrap();
    let cal = calibrate_transport_time(
        &c.field,
        c.source,
        c.target,
        window(0.2),
        &CalibrationOptions::default(),
    )
    .unwrap();
    assert!((0.2..=0.23).contains(&cal.time), "T* = {}", cal.time);
    assert!(cal.relative_mismatch <= 0.05);
    assert!(hofer_energy(&c.field, cal.time).unwrap() <= 0.23);
}

#[test]
fn reversed_swap_brings_the_disk_back() {
    let c = default_swap(0.2, GRID).unwrap();
    let back = c.clone().reversed();
    assert_eq!(back.source, c.target);
    let cal = calibrate_transport_time(
        &back.field,
        back.source,
        back.target,
        window(0.2),
        &CalibrationOptions::default(),
    )
    .unwrap();
    assert!(cal.relative_mismatch <= 0.05);
}

#[test]
fn loop_translation_fixes_the_disk_and_winds_once() {
    let (c, puncture) = default_loop(0.2, GRID).unwrap();
    let (lo, hi) = c.field.extrema_at(0.0);
    assert_eq!(hi - lo, 1.0);
    assert!(c.encloses(puncture));
    let cal = calibrate_transport_time(
        &c.field,
        c.source,
        c.source,
        window(0.2),
        &CalibrationOptions::default(),
    )
    .unwrap();
    assert!((0.2..=0.23).contains(&cal.time), "T* = {}", cal.time);
    assert!(cal.relative_mismatch <= 0.05);
    let tr = hofer_core::flow::integrate_flow(
        &c.field,
        c.source.center,
        cal.time,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let class = trajectory_class(&tr, &[puncture], c.source).unwrap();
    assert_eq!(class.windings, vec![1]);
}

#[test]
fn self_intersecting_loop_is_rejected() {
    let (d, _, chart, spec) = puncture_layout(0.2, 1, GRID);
    let r = d.radius;
    let route = [
        [r, 0.0],
        [r + 0.4, 0.0],
        [r + 0.4, r + 0.6],
        [-r - 0.4, r + 0.6],
        [-r - 0.4, r + 0.3],
        [r + 0.6, r + 0.3],
        [r + 0.6, -r - 0.3],
        [-r - 0.6, -r - 0.3],
        [-r - 0.6, 0.0],
        [-r, 0.0],
    ];
    let route: Vec<Waypoint> = route
        .iter()
        .map(|&at| Waypoint {
            at,
            radius: spec.fillet,
        })
        .collect();
    let chart = PlanarChart::covering(-2.0, 2.0, -2.0, 2.0, chart.nx, 0.0);
    match make_loop_translation(d, &route, chart, &spec) {
        Err(Error::Geometry(m)) => assert!(m.contains("self-intersection"), "{m}"),
        other => panic!("expected a self-intersection error, got {other:?}"),
    }
}

#[test]
fn zero_class_gives_an_empty_schedule() {
    let s = schedule_for_class(
        0.2,
        &H1Class::genus0(vec![0, 0]),
        GRID,
        &CalibrationOptions::default(),
    )
    .unwrap();
    assert!(s.stages.is_empty());
    assert_eq!(s.energy().unwrap(), 0.0);
    assert_eq!(
        s.class(&IntegratorOptions::default()).unwrap().windings,
        vec![0, 0]
    );
}

#[test]
fn simple_class_costs_one_loop() {
    let a = 0.6;
    let s = schedule_for_class(
        a,
        &H1Class::genus0(vec![1]),
        GRID,
        &CalibrationOptions::default(),
    )
    .unwrap();
    assert_eq!(s.stages.len(), 1);
    let excess = s.calibrations[0].time - a;
    assert!(excess <= 0.15 * a, "excess {excess}");
    assert!(s.energy().unwrap() <= a + excess + 1e-12);
    assert_eq!(
        s.class(&IntegratorOptions::default()).unwrap().windings,
        vec![1]
    );
}

#[test]
fn schedule_realizes_two_minus_three() {
    let alpha = H1Class::genus0(vec![2, -3]);
    let s = schedule_for_class(0.2, &alpha, 512, &CalibrationOptions::default()).unwrap();
    assert_eq!(s.stages.len(), 5);
    let parts: f64 = s
        .stages
        .iter()
        .map(|st| hofer_energy(&st.field, st.duration).unwrap())
        .sum();
    assert!((s.energy().unwrap() - parts).abs() < 1e-12);
    let worst = s.calibrations.iter().map(|c| c.time).fold(0.0, f64::max);
    assert!(s.energy().unwrap() <= 5.0 * worst + 1e-12);
    let class = s.class(&IntegratorOptions::default()).unwrap();
    assert_eq!(class.windings, vec![2, -3]);
}

#[test]
fn two_pipes_at_just_under_half_the_area() {
    let a = 0.5 - 1e-3;
    let (there, home, _) = two_pipe_swaps(a, GRID).unwrap();
    for sign in [-1, 1] {
        let s = two_pipe_schedule(a, sign, GRID, &CalibrationOptions::default()).unwrap();
        assert_eq!(s.stages.len(), 2);
        let eps = s
            .calibrations
            .iter()
            .map(|c| c.time - a)
            .fold(0.0, f64::max);
        for c in [&there, &home] {
            let rt = c.source.radius + c.spec.margin;
            let beyond = PI * (rt * rt - c.source.radius.powi(2)) + c.spec.width * c.pipe_length;
            assert!(eps <= beyond, "excess {eps} over tube {beyond}");
        }
        for c in &s.calibrations {
            assert!(c.relative_mismatch <= 0.05);
        }
        assert!(s.energy().unwrap() <= 2.0 * a + 2.0 * eps + 1e-12);
        let class = s.class(&IntegratorOptions::default()).unwrap();
        assert_eq!(class.windings, vec![sign]);
    }
}

#[test]
fn two_pipes_need_room_for_two_disks() {
    let r = two_pipe_schedule(0.6, 1, GRID, &CalibrationOptions::default());
    assert!(matches!(r, Err(Error::OutOfRange(_))));
}

/// `f(t) G` with `f` linear between `knots`, taking `values` there.
fn ramp(g: &ScalarField, knots: &[f64], values: &[f64]) -> ScalarField {
    let base = g.samples();
    let layers = values
        .iter()
        .map(|&f| base.iter().map(|v| f * v).collect())
        .collect();
    ScalarField::new(*g.grid(), knots.to_vec(), layers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn energy_of_a_concatenation_is_the_sum_of_its_stages(
        stages in prop::collection::vec((0.05f64..1.0, 0.0f64..2.0), 1..5),
        start in 0.0f64..2.0,
    ) {
        let chart = PlanarChart::covering(-1.0, 1.0, -1.0, 1.0, 32, 0.0);
        let g = ScalarField::from_fn_autonomous(chart.grid(), |x, y| {
            (1.0 - x * x - y * y).max(0.0)
        })
        .unwrap();
        let mut knots = vec![0.0];
        let mut values = vec![start];
        let mut s = Schedule::new(Disk::new([0.0, 0.0], 0.1), vec![]);
        for &(d, v) in &stages {
            let part = ramp(&g, &[0.0, d], &[*values.last().unwrap(), v]);
            s.push(part, d).unwrap();
            knots.push(knots.last().unwrap() + d);
            values.push(v);
        }
        let whole = ramp(&g, &knots, &values);
        let total = hofer_energy(&whole, *knots.last().unwrap()).unwrap();
        prop_assert!((s.energy().unwrap() - total).abs() < 1e-6 * (1.0 + total));
    }
}
