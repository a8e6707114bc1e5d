#![allow(dead_code)]

use hofer_core::geometry::{
    parse_field_expression, AnnulusChart, Chart, SamplingOptions, ScalarField,
};

pub fn annulus(n: usize, collar: f64) -> Chart {
    Chart::Annulus(AnnulusChart {
        collar,
        ..AnnulusChart::with_resolution(n)
    })
}

pub fn field(expr: &str, n: usize) -> ScalarField {
    parse_field_expression(expr, &annulus(n, 0.02), SamplingOptions::default()).unwrap()
}

/// Fourier mode `(amplitude, θ frequency, h frequency, phase)`.
pub type Mode = (f64, u32, u32, f64);

/// Sum of modes `a sin(2π(mθ + φ)) sin(π l h)`, cut off near the boundary.
pub fn modes_field(modes: &[Mode], n: usize) -> ScalarField {
    let chart = annulus(n, 0.02);
    let tau = std::f64::consts::TAU;
    let pi = std::f64::consts::PI;
    ScalarField::from_fn_autonomous(chart.grid(), |x, y| {
        let v: f64 = modes
            .iter()
            .map(|&(a, m, l, phi)| {
                a * (tau * (m as f64 * x + phi)).sin() * (pi * l as f64 * y).sin()
            })
            .sum();
        v * chart.cutoff([x, y])
    })
    .unwrap()
}

/// Round bump `(1 - r²/ρ²)²` of height `height` centered at `c` in the
/// annulus (θ distance wraps).
pub fn bump_expr(c: [f64; 2], rho: f64, height: f64) -> String {
    let r2 = format!(
        "((θ-{x})*(θ-{x})+(h-{y})*(h-{y}))/{rr}",
        x = c[0],
        y = c[1],
        rr = rho * rho
    );
    format!("{height}*max(0, 1-{r2})*max(0, 1-{r2})")
}
