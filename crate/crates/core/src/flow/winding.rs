use alloc::vec::Vec;

use super::Trajectory;
use crate::geometry::{Disk, Point};
use crate::math::{atan2, floor, TAU};
use crate::{Error, Result};

/// Largest accepted distance of a winding number from an integer.
pub const WINDING_RESIDUAL: f64 = 0.05;

/// Class of a closed-up trajectory: one winding number per puncture (or the
/// single `θ` winding on the annulus) with the distance of the raw value from
/// the integer.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingVector {
    pub windings: Vec<i64>,
    pub residuals: Vec<f64>,
}

/// Homology class of the loop formed by `traj` closed by the straight chord
/// from its end back to its start inside `disk`.
pub fn trajectory_class(
    traj: &Trajectory,
    punctures: &[Point],
    disk: Disk,
) -> Result<WindingVector> {
    let g = traj.grid;
    let (start, end) = (traj.start(), traj.end());
    let inside = |p: Point| g.distance(p, disk.center) <= disk.radius;
    if !inside(start) || !inside(end) {
        return Err(Error::EndpointOutsideDisk);
    }
    if g.periodic_x {
        let chord = g.delta(end, start)[0];
        let raw = (end[0] - start[0] + chord) / g.width;
        return finish(alloc::vec![raw]);
    }
    if let Some(j) = punctures.iter().position(|&p| disk.contains(p)) {
        return Err(Error::PunctureInsideDisk(j));
    }
    let raw = punctures
        .iter()
        .map(|&p| {
            let mut sum = 0.0;
            let mut prev = sub(start, p);
            for &q in traj.points[1..].iter().chain(core::iter::once(&start)) {
                let cur = sub(q, p);
                sum += atan2(cross(prev, cur), dot(prev, cur));
                prev = cur;
            }
            sum / TAU
        })
        .collect();
    finish(raw)
}

fn finish(raw: Vec<f64>) -> Result<WindingVector> {
    let mut windings = Vec::with_capacity(raw.len());
    let mut residuals = Vec::with_capacity(raw.len());
    for (j, w) in raw.into_iter().enumerate() {
        let n = floor(w + 0.5);
        let r = (w - n).abs();
        if r >= WINDING_RESIDUAL {
            return Err(Error::WindingResidual {
                puncture: j,
                residual: r,
            });
        }
        windings.push(n as i64);
        residuals.push(r);
    }
    Ok(WindingVector {
        windings,
        residuals,
    })
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
