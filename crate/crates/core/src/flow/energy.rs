use alloc::vec::Vec;

use crate::geometry::ScalarField;
use crate::{Error, Result};

const SUBDIVISIONS: usize = 100;

/// `∫_0^T (max H_t - min H_t) dt`, with the trapezoid rule on at least 100
/// subintervals refined at the time knots. Negative `T` integrates backward
/// and gives the same energy as the reversed flow.
pub fn hofer_energy(h: &ScalarField, duration: f64) -> Result<f64> {
    if !duration.is_finite() {
        return Err(Error::OutOfRange("duration must be finite".into()));
    }
    if h.is_autonomous() {
        return Ok(duration.abs() * h.oscillation_at(0.0));
    }
    let (lo, hi) = if duration < 0.0 {
        (duration, 0.0)
    } else {
        (0.0, duration)
    };
    let mut ts: Vec<f64> = (0..=SUBDIVISIONS)
        .map(|k| lo + (hi - lo) * k as f64 / SUBDIVISIONS as f64)
        .chain(h.knots().iter().copied().filter(|&t| t > lo && t < hi))
        .collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let osc: Vec<f64> = ts.iter().map(|&t| h.oscillation_at(t)).collect();
    Ok(ts
        .windows(2)
        .zip(osc.windows(2))
        .map(|(t, o)| 0.5 * (t[1] - t[0]) * (o[0] + o[1]))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_field_expression, AnnulusChart, Chart, SamplingOptions};

    fn field(expr: &str) -> ScalarField {
        let chart = Chart::Annulus(AnnulusChart::with_resolution(64));
        parse_field_expression(expr, &chart, SamplingOptions::default()).unwrap()
    }

    #[test]
    fn shift_energy() {
        let h = field("h");
        let e = hofer_energy(&h, 2.0).unwrap();
        assert!((e - 2.0 * h.oscillation_at(0.0)).abs() < 1e-12);
        assert_eq!(hofer_energy(&h, -2.0).unwrap(), e);
        assert_eq!(hofer_energy(&field("0"), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_decay_halves_energy() {
        let h = field("(1-t)*h");
        let e = hofer_energy(&h, 1.0).unwrap();
        assert!((e - 0.5 * h.oscillation_at(0.0)).abs() < 1e-9, "{e}");
    }
}
