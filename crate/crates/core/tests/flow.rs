mod common;

use common::{field, modes_field, Mode};
use hofer_core::constructions::{make_puncture_shift, ShiftProfile};
use hofer_core::flow::{
    flux_through_cut, hofer_energy, integrate_flow, trajectory_class, vector_field_at,
    verify_transport, IntegratorOptions, TransportOptions,
};
use hofer_core::geometry::{Disk, PlanarChart, Point, ScalarField, StarChart};
use proptest::prelude::*;

const RHO: f64 = 0.8;

/// `(1 - r²/ρ²)³` on `[-1, 1]²` and its derivative in `r`.
fn radial(n: usize) -> ScalarField {
    let g = PlanarChart::covering(-1.0, 1.0, -1.0, 1.0, n, 0.0).grid();
    ScalarField::from_fn_autonomous(g, |x, y| {
        let u = (1.0 - (x * x + y * y) / (RHO * RHO)).max(0.0);
        u * u * u
    })
    .unwrap()
}

fn radial_slope(r: f64) -> f64 {
    let u = 1.0 - r * r / (RHO * RHO);
    -6.0 * r / (RHO * RHO) * u * u
}

#[test]
fn radial_bump_velocity_matches_gradient() {
    let h = radial(512);
    for &(r, a) in &[(0.1, 0.3), (0.3, 1.9), (0.5, 4.0), (0.7, 5.5)] {
        let p = [r * f64::cos(a), r * f64::sin(a)];
        let v = vector_field_at(&h, p, 0.0).unwrap();
        let speed = v[0].hypot(v[1]);
        let want = radial_slope(r).abs();
        assert!(
            (speed - want).abs() < 0.01 * want,
            "r = {r}: {speed} vs {want}"
        );
        let radial_part = (v[0] * p[0] + v[1] * p[1]) / r;
        assert!(
            radial_part.abs() < 0.02 * want,
            "r = {r}: radial {radial_part}"
        );
    }
}

#[test]
fn radial_bump_period() {
    let h = radial(512);
    let r = 0.4;
    let period = std::f64::consts::TAU * r / radial_slope(r).abs();
    let x0 = [r, 0.0];
    let tr = integrate_flow(&h, x0, period, &IntegratorOptions::default()).unwrap();
    let e = tr.end();
    assert!((e[0] - x0[0]).hypot(e[1] - x0[1]) < 1e-3, "{e:?}");
    assert_eq!(tr.fallback_steps, 0);
    let quarter = integrate_flow(&h, x0, 0.25 * period, &IntegratorOptions::default()).unwrap();
    assert!(
        quarter.end()[1] > 0.39,
        "counterclockwise: {:?}",
        quarter.end()
    );
}

#[test]
fn trajectories_have_small_increasing_steps() {
    let h = radial(128);
    let cell = 2.0 / 128.0;
    let tr = integrate_flow(&h, [0.3, 0.1], 2.0, &IntegratorOptions::with_step(0.05)).unwrap();
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    assert!(tr
        .points
        .windows(2)
        .all(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]) <= cell));
}

#[test]
fn shift_class_in_the_annulus() {
    let h = field("h", 128);
    let disk = Disk::new([0.0, 0.5], 0.1);
    for p in [
        [0.0, 0.5],
        [0.05, 0.45],
        [-0.03, 0.57],
        [0.0, 0.41],
        [0.08, 0.5],
    ] {
        let tr = integrate_flow(&h, p, 1.0, &IntegratorOptions::default()).unwrap();
        let w = trajectory_class(&tr, &[], disk).unwrap();
        assert_eq!(w.windings, [1]);
        let back = integrate_flow(&h, p, -2.0, &IntegratorOptions::default()).unwrap();
        assert_eq!(trajectory_class(&back, &[], disk).unwrap().windings, [-2]);
    }
}

#[test]
fn puncture_shift_flow_winds_once_around_its_puncture() {
    let domain = Disk::with_area([0.0, 0.0], 1.0);
    let (p1, p2) = ([-0.25, 0.0], [0.45, 0.0]);
    let r = domain.radius + 0.01;
    let chart = PlanarChart::covering(-r, r, -r, r, 512, 0.0);
    let profile = ShiftProfile {
        start: 0.35,
        full: 0.5,
        fade_start: 0.9,
        fade_end: 0.97,
    };
    let h = make_puncture_shift(chart, domain, p1, profile).unwrap();
    let star = StarChart::new(domain, p1).unwrap();
    let c = star.from_annulus([0.1, 0.7]);
    let disk = Disk::new(c, 0.01);
    let base: Vec<Point> = (0..5)
        .map(|k| {
            let a = k as f64 * 1.3;
            [
                c[0] + 0.006 * a.cos() * (k as f64 / 4.0),
                c[1] + 0.006 * a.sin() * (k as f64 / 4.0),
            ]
        })
        .collect();
    for p in base {
        let tr = integrate_flow(&h, p, 1.0, &IntegratorOptions::default()).unwrap();
        let w = trajectory_class(&tr, &[p1, p2], disk).unwrap();
        assert_eq!(w.windings, [1, 0]);
        assert!(w.residuals.iter().all(|&r| r < 0.05));
    }
}

#[test]
fn forward_then_backward_returns() {
    let modes: [Mode; 3] = [(0.3, 1, 1, 0.1), (0.1, 2, 3, 0.4), (0.05, 3, 2, 0.7)];
    let h = modes_field(&modes, 128);
    let opts = IntegratorOptions::default();
    for x0 in [[0.2, 0.3], [0.7, 0.6], [0.45, 0.85]] {
        let fwd = integrate_flow(&h, x0, 0.7, &opts).unwrap();
        let back = integrate_flow(&h, fwd.end(), -0.7, &opts).unwrap();
        let e = back.end();
        assert!((e[0] - x0[0]).hypot(e[1] - x0[1]) < 1e-6, "{x0:?} -> {e:?}");
    }
}

#[test]
fn flowed_disks_keep_their_area() {
    let modes: [Mode; 2] = [(0.3, 1, 1, 0.1), (0.1, 2, 3, 0.4)];
    let h = modes_field(&modes, 256);
    let d = Disk::new([0.5, 0.5], 0.15);
    let rep = verify_transport(&h, d, d, 0.5, 1.0, &TransportOptions::default()).unwrap();
    assert!(rep.area_drift < 0.01, "{rep:?}");
    assert!(rep.interior_inside > 0.99);
    let shifted = verify_transport(
        &field("h", 128),
        d,
        d,
        1.0,
        0.01,
        &TransportOptions::default(),
    )
    .unwrap();
    assert!(shifted.pass && shifted.area_drift < 0.01, "{shifted:?}");
}

#[test]
fn energy_of_zero_field() {
    assert_eq!(hofer_energy(&field("0", 32), 5.0).unwrap(), 0.0);
}

#[test]
fn flux_from_plateau_to_outside_is_one() {
    let g = PlanarChart::covering(-1.0, 1.0, -1.0, 1.0, 128, 0.0).grid();
    let h = ScalarField::from_fn_autonomous(g, |x, y| {
        let r = x.hypot(y);
        (1.0 - ((r - 0.3) / 0.2).clamp(0.0, 1.0)).clamp(0.0, 1.0)
    })
    .unwrap();
    let f = flux_through_cut(&h, &[[0.1, 0.05], [0.6, 0.2], [0.9, 0.0]], 0.0).unwrap();
    assert!((f - 1.0).abs() < 1e-12);
    let z = ScalarField::zeros(g);
    assert_eq!(
        flux_through_cut(&z, &[[0.1, 0.05], [0.6, 0.2]], 0.0).unwrap(),
        0.0
    );
}

fn mode() -> impl Strategy<Value = Mode> {
    (-1.0..1.0f64, 0u32..4, 1u32..4, 0.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flux_equals_endpoint_difference(
        modes in prop::collection::vec(mode(), 1..4),
        cut in prop::collection::vec((-0.5..1.5f64, 0.02..0.98f64), 2..5),
    ) {
        let h = modes_field(&modes, 48);
        let cut: Vec<Point> = cut.into_iter().map(|(x, y)| [x, y]).collect();
        let f = flux_through_cut(&h, &cut, 0.0).unwrap();
        let want = h.value(cut[0], 0.0).unwrap() - h.value(*cut.last().unwrap(), 0.0).unwrap();
        prop_assert!((f - want).abs() < 1e-3);
    }
}
