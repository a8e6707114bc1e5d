use alloc::format;

use super::{is_simple, word_length_genus0, Basis, H1Class};
use crate::geometry::SurfaceSpec;
use crate::{Error, Result};

/// Argument that produced one side of a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// The class is zero.
    Zero,
    /// Any isotopy moving the disk off itself has energy at least `A`.
    EnergyCapacity,
    /// Lipschitz estimate of the quasimorphism coefficients.
    Quasimorphism,
    /// Two pipe transports when `A <= Area / 2`.
    Displacement,
    /// One loop translation along a simple representative.
    SimpleLoop,
    /// Splitting into two simple classes when the genus is positive.
    PositiveGenus,
    /// Iterating the annulus shift.
    Annulus,
    /// One loop translation per simple loop of a shortest word.
    WordLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub source: BoundSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lower: Bound,
    pub upper: Bound,
    /// Genus 0 only: `A · ‖α‖_S`, the expected value of the stabilized
    /// spectrum. Reported, never asserted.
    pub conjectured_stable: Option<f64>,
    /// Constant `c` in `|ρ(φ)| <= c ‖φ‖` used by the quasimorphism bound, in
    /// units of the surface area.
    pub lipschitz_constant: Option<f64>,
}

/// Energy of iterating the annulus shift `n` times, `(2A - Area)|n| + Area`.
/// Meaningful for `A > Area / 2`.
pub fn annulus_upper(area: f64, a: f64, n: i64) -> f64 {
    (2.0 * a - area) * n.unsigned_abs() as f64 + area
}

/// Lower and upper bounds on the energy needed to translate a disk of area
/// `a` along `alpha`. `s` selects the quasimorphism parameters (default
/// `s1 = 0`, `s2 = 2A - 1` after normalizing the area to 1).
pub fn l_a_bounds(
    surface: &SurfaceSpec,
    a: f64,
    alpha: &H1Class,
    s: Option<(f64, f64)>,
) -> Result<BoundReport> {
    surface.validate()?;
    alpha.check_surface(surface)?;
    if !(a > 0.0 && a < surface.area) {
        return Err(Error::OutOfRange(format!(
            "A = {a} must lie in (0, {})",
            surface.area
        )));
    }
    let area = surface.area;
    let an = a / area;
    let genus0 = matches!(alpha.basis(), Basis::Genus0 { .. });
    let qm = genus0 && an > 0.5;
    let (s1, s2) = s.unwrap_or((0.0, 2.0 * an - 1.0));
    if qm && !(0.0 <= s1 && s1 < s2 && s2 <= 2.0 * an - 1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!(
            "need 0 <= s1 < s2 <= 2A - 1, got ({s1}, {s2})"
        )));
    }
    let lipschitz_constant = qm.then(|| 2.0 / (s2 - s1));
    let conjectured_stable = if genus0 {
        Some(a * word_length_genus0(alpha)? as f64)
    } else {
        None
    };
    if alpha.is_zero() {
        let zero = Bound {
            value: 0.0,
            source: BoundSource::Zero,
        };
        return Ok(BoundReport {
            lower: zero,
            upper: zero,
            conjectured_stable,
            lipschitz_constant,
        });
    }

    let mut upper: Option<Bound> = None;
    let mut offer = |value: f64, source| {
        if upper.map_or(true, |u| value < u.value) {
            upper = Some(Bound { value, source });
        }
    };
    if an <= 0.5 {
        offer(2.0 * a, BoundSource::Displacement);
    }
    if is_simple(alpha) == Some(true) {
        offer(a, BoundSource::SimpleLoop);
    }
    if surface.genus > 0 {
        offer(2.0 * a, BoundSource::PositiveGenus);
    }
    if genus0 {
        if surface.punctures == 1 && an > 0.5 {
            offer(
                annulus_upper(area, a, alpha.coefficients()[0]),
                BoundSource::Annulus,
            );
        }
        offer(
            a * word_length_genus0(alpha)? as f64,
            BoundSource::WordLength,
        );
    }
    let upper =
        upper.ok_or_else(|| Error::Basis(format!("no upper bound applies to {alpha:?}")))?;

    let mut lower = Bound {
        value: a,
        source: BoundSource::EnergyCapacity,
    };
    if let Some(c) = lipschitz_constant {
        let top = alpha
            .coefficients()
            .iter()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0) as f64;
        let q = top / c * area;
        if q > lower.value {
            lower = Bound {
                value: q,
                source: BoundSource::Quasimorphism,
            };
        }
    }
    Ok(BoundReport {
        lower,
        upper,
        conjectured_stable,
        lipschitz_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn annulus_example() {
        let s = SurfaceSpec::annulus(1.0).unwrap();
        let r = l_a_bounds(&s, 0.75, &H1Class::genus0(vec![4]), None).unwrap();
        assert!((r.upper.value - 3.0).abs() < 1e-12);
        assert!((r.lower.value - 1.0).abs() < 1e-12);
        assert_eq!(r.lower.source, BoundSource::Quasimorphism);
        assert_eq!(r.lipschitz_constant, Some(4.0));
    }

    #[test]
    fn small_disks() {
        let s = SurfaceSpec::punctured_disk(3, 1.0).unwrap();
        let r = l_a_bounds(&s, 0.3, &H1Class::genus0(vec![3, -2, 1]), None).unwrap();
        assert_eq!((r.lower.value, r.upper.value), (0.3, 0.6));
        let t = SurfaceSpec::new(1, 0, 1.0, vec![]).unwrap();
        let r = l_a_bounds(&t, 0.3, &H1Class::torus(4, 2), None).unwrap();
        assert_eq!((r.lower.value, r.upper.value), (0.3, 0.6));
        let r = l_a_bounds(&s, 0.3, &H1Class::genus0(vec![0, 0, 0]), None).unwrap();
        assert_eq!((r.lower.value, r.upper.value), (0.0, 0.0));
    }

    #[test]
    fn area_scaling_and_errors() {
        let s = SurfaceSpec::annulus(2.0).unwrap();
        let r = l_a_bounds(&s, 1.5, &H1Class::genus0(vec![-4]), None).unwrap();
        assert!((r.upper.value - 6.0).abs() < 1e-12);
        assert!((r.lower.value - 2.0).abs() < 1e-12);
        assert!(l_a_bounds(&s, 2.5, &H1Class::genus0(vec![1]), None).is_err());
        assert!(l_a_bounds(&s, 1.5, &H1Class::genus0(vec![1]), Some((0.3, 0.2))).is_err());
    }
}
