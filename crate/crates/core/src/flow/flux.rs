use alloc::vec::Vec;

use super::vector_field_at;
use crate::geometry::{Point, ScalarField};
use crate::math::{ceil, floor, sqrt};
use crate::{Error, Result};

/// Flux of the Hamiltonian vector field through the polyline `cut` at time
/// `t`, counted positive from right to left of the direction of travel.
/// Each segment is split at the grid lines and integrated by two-point Gauss
/// quadrature, which is exact for the bilinear interpolant, so the result is
/// `H(first) - H(last)` up to rounding.
pub fn flux_through_cut(h: &ScalarField, cut: &[Point], t: f64) -> Result<f64> {
    if cut.len() < 2 {
        return Err(Error::Degenerate("a cut needs at least two points".into()));
    }
    let mut total = 0.0;
    let mut length = 0.0;
    for w in cut.windows(2) {
        let (a, b) = (w[0], w[1]);
        for p in [a, b] {
            if !h.grid().contains(p) {
                return Err(Error::OutsideChart { x: p[0], y: p[1] });
            }
        }
        let d = [b[0] - a[0], b[1] - a[1]];
        length += d[0].abs() + d[1].abs();
        let breaks = crossings(h, a, d);
        let g = 0.5 / sqrt(3.0);
        for s in breaks.windows(2) {
            let (m, half) = (0.5 * (s[0] + s[1]), s[1] - s[0]);
            for q in [m - g * half, m + g * half] {
                let v = vector_field_at(h, [a[0] + q * d[0], a[1] + q * d[1]], t)?;
                total += 0.5 * half * (v[1] * d[0] - v[0] * d[1]);
            }
        }
    }
    if length == 0.0 {
        return Err(Error::Degenerate("cut has zero length".into()));
    }
    Ok(total)
}

/// Sorted parameters in `[0, 1]` where `a + s d` meets a grid line.
fn crossings(h: &ScalarField, a: Point, d: [f64; 2]) -> Vec<f64> {
    let g = h.grid();
    let mut s = alloc::vec![0.0, 1.0];
    for (o, step, ai, di) in [(g.x0, g.dx(), a[0], d[0]), (g.y0, g.dy(), a[1], d[1])] {
        if di == 0.0 {
            continue;
        }
        let u0 = (ai - o) / step;
        let u1 = (ai + di - o) / step;
        let (lo, hi) = if u0 < u1 { (u0, u1) } else { (u1, u0) };
        let mut k = ceil(lo);
        while k <= floor(hi) {
            let v = (k - u0) / (u1 - u0);
            if v > 0.0 && v < 1.0 {
                s.push(v);
            }
            k += 1.0;
        }
    }
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    s.dedup();
    s
}
