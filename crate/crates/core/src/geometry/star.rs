use alloc::format;
use alloc::vec::Vec;

use super::{Disk, Point};
use crate::math::{atan2, cos, hypot, rem_euclid, sin, sqrt, TAU};
use crate::{Error, Result};

const SAMPLES: usize = 4096;

/// Area-preserving identification of a round disk punctured at an interior
/// point `center` with the annulus chart: `h = 0` on the boundary circle,
/// `h -> 1` at the puncture, and `θ` the normalized area swept by the ray
/// from the puncture. Areas are divided by the disk area, so the disk maps
/// onto a chart of area 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StarChart {
    disk: Disk,
    center: Point,
    /// `θ` at the angles `2π k / SAMPLES`, `k = 0..=SAMPLES`.
    theta: Vec<f64>,
}

impl StarChart {
    pub fn new(disk: Disk, center: Point) -> Result<Self> {
        let d = hypot(center[0] - disk.center[0], center[1] - disk.center[1]);
        if !(d < disk.radius) {
            return Err(Error::Geometry(format!(
                "chart center {center:?} is not inside the disk"
            )));
        }
        let mut chart = Self {
            disk,
            center,
            theta: Vec::with_capacity(SAMPLES + 1),
        };
        let h = TAU / SAMPLES as f64;
        let mut acc = 0.0;
        chart.theta.push(0.0);
        let r0 = chart.radius(0.0);
        let mut prev = 0.5 * r0 * r0;
        for k in 1..=SAMPLES {
            let r = chart.radius(k as f64 * h);
            let cur = 0.5 * r * r;
            acc += 0.5 * h * (prev + cur);
            chart.theta.push(acc);
            prev = cur;
        }
        for t in chart.theta.iter_mut() {
            *t /= acc;
        }
        Ok(chart)
    }

    pub fn disk(&self) -> Disk {
        self.disk
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Distance from the center to the boundary circle along angle `phi`.
    pub fn radius(&self, phi: f64) -> f64 {
        let (ux, uy) = (cos(phi), sin(phi));
        let dx = self.center[0] - self.disk.center[0];
        let dy = self.center[1] - self.disk.center[1];
        let b = dx * ux + dy * uy;
        let c = dx * dx + dy * dy - self.disk.radius * self.disk.radius;
        -b + sqrt(b * b - c)
    }

    fn theta_of(&self, phi: f64) -> f64 {
        let u = rem_euclid(phi, TAU) / TAU * SAMPLES as f64;
        let k = (u as usize).min(SAMPLES - 1);
        let f = u - k as f64;
        (1.0 - f) * self.theta[k] + f * self.theta[k + 1]
    }

    fn phi_of(&self, theta: f64) -> f64 {
        let t = rem_euclid(theta, 1.0);
        let k = self.theta.partition_point(|&x| x <= t).clamp(1, SAMPLES) - 1;
        let f = (t - self.theta[k]) / (self.theta[k + 1] - self.theta[k]);
        (k as f64 + f) * TAU / SAMPLES as f64
    }

    /// `(θ, h)` of a point of the disk; `None` outside it.
    pub fn to_annulus(&self, p: Point) -> Option<Point> {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let phi = atan2(dy, dx);
        let r = hypot(dx, dy);
        let big = self.radius(phi);
        if r > big * (1.0 + 1e-12) {
            return None;
        }
        Some([self.theta_of(phi), (1.0 - (r * r) / (big * big)).max(0.0)])
    }

    /// Point of the disk with annulus coordinates `q`.
    pub fn from_annulus(&self, q: Point) -> Point {
        let phi = self.phi_of(q[0]);
        let r = self.radius(phi) * sqrt((1.0 - q[1]).clamp(0.0, 1.0));
        [self.center[0] + r * cos(phi), self.center[1] + r * sin(phi)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = StarChart::new(Disk::new([0.1, 0.2], 0.5), [0.3, 0.1]).unwrap();
        for &q in &[[0.1, 0.2], [0.77, 0.9], [0.5, 0.01], [0.99, 0.5]] {
            let p = c.from_annulus(q);
            let back = c.to_annulus(p).unwrap();
            assert!((back[0] - q[0]).abs() < 1e-9 && (back[1] - q[1]).abs() < 1e-9);
        }
        assert!(c.to_annulus([0.7, 0.2]).is_none());
    }

    #[test]
    fn centered_chart_is_polar() {
        let c = StarChart::new(Disk::new([0.0, 0.0], 1.0), [0.0, 0.0]).unwrap();
        let q = c.to_annulus([0.0, 0.5]).unwrap();
        assert!((q[0] - 0.25).abs() < 1e-12);
        assert!((q[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn preserves_area_fractions() {
        // the half disk on the far side of an off-center point
        let c = StarChart::new(Disk::new([0.0, 0.0], 1.0), [0.4, 0.0]).unwrap();
        let n = 400;
        let mut inside = 0usize;
        for i in 0..n {
            for j in 0..n {
                let q = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                if c.from_annulus(q)[0] < 0.0 {
                    inside += 1;
                }
            }
        }
        let frac = inside as f64 / (n * n) as f64;
        assert!((frac - 0.5).abs() < 5e-3, "{frac}");
    }
}
