use alloc::vec::Vec;

use super::calibrate::{calibrate_transport_time, Calibration, CalibrationOptions};
use super::pipes::{
    check_punctures, loop_route, make_loop_translation, puncture_layout, two_pipe_swaps,
};
use crate::flow::{
    hofer_energy, integrate_flow, trajectory_class, IntegratorOptions, Trajectory, WindingVector,
};
use crate::geometry::{Disk, PlanarChart, Point, ScalarField};
use crate::homology::{simple_loops_genus0, H1Class};
use crate::{Error, Result};

/// One autonomous piece of a schedule, run for `duration` from time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub field: ScalarField,
    pub duration: f64,
}

/// Stages run one after the other, moving `disk` among `punctures`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub stages: Vec<Stage>,
    pub disk: Disk,
    pub punctures: Vec<Point>,
    pub chart: Option<PlanarChart>,
    /// Calibrations behind the stages, one per distinct loop.
    pub calibrations: Vec<Calibration>,
}

impl Schedule {
    pub fn new(disk: Disk, punctures: Vec<Point>) -> Self {
        Self {
            stages: Vec::new(),
            disk,
            punctures,
            chart: None,
            calibrations: Vec::new(),
        }
    }

    pub fn push(&mut self, field: ScalarField, duration: f64) -> Result<()> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::OutOfRange("stage durations must be positive".into()));
        }
        self.stages.push(Stage { field, duration });
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.stages.iter().map(|s| s.duration).sum()
    }

    /// Sum of the stage energies.
    pub fn energy(&self) -> Result<f64> {
        self.stages
            .iter()
            .map(|s| hofer_energy(&s.field, s.duration))
            .sum()
    }

    /// Path of `x0` through all stages, with times running on.
    pub fn flow(&self, x0: Point, opts: &IntegratorOptions) -> Result<Trajectory> {
        let mut times = alloc::vec![0.0];
        let mut points = alloc::vec![x0];
        let mut fallback_steps = 0;
        let mut grid = None;
        let mut offset = 0.0;
        for s in &self.stages {
            let tr = integrate_flow(&s.field, *points.last().unwrap(), s.duration, opts)?;
            times.extend(tr.times[1..].iter().map(|t| t + offset));
            points.extend_from_slice(&tr.points[1..]);
            fallback_steps += tr.fallback_steps;
            grid.get_or_insert(tr.grid);
            offset += s.duration;
        }
        let grid = match grid {
            Some(g) => g,
            None => return Err(Error::OutOfRange("the schedule has no stages".into())),
        };
        Ok(Trajectory {
            grid,
            times,
            points,
            fallback_steps,
        })
    }

    /// Class of the path of the disk center, closed inside the disk.
    pub fn class(&self, opts: &IntegratorOptions) -> Result<WindingVector> {
        if self.stages.is_empty() {
            return Ok(WindingVector {
                windings: alloc::vec![0; self.punctures.len()],
                residuals: alloc::vec![0.0; self.punctures.len()],
            });
        }
        let tr = self.flow(self.disk.center, opts)?;
        trajectory_class(&tr, &self.punctures, self.disk)
    }
}

/// Schedule realizing `alpha` on a disk with punctures by loop
/// translations of a disk of area `area`, one per simple loop of a
/// shortest decomposition. Each distinct loop is calibrated once; loops of
/// negative sign run the negated field.
pub fn schedule_for_class(
    area: f64,
    alpha: &H1Class,
    grid: usize,
    opts: &CalibrationOptions,
) -> Result<Schedule> {
    let loops = simple_loops_genus0(alpha)?;
    let k = alpha.coefficients().len();
    if k == 0 {
        return Err(Error::OutOfRange("the surface has no punctures".into()));
    }
    let (disk, punctures, chart, spec) = puncture_layout(area, k, grid);
    let mut out = Schedule::new(disk, punctures.clone());
    out.chart = Some(chart);
    let mut built: Vec<(Vec<bool>, ScalarField, f64)> = Vec::new();
    for (sign, enclosed) in loops {
        let at = match built.iter().position(|b| b.0 == enclosed) {
            Some(i) => i,
            None => {
                let route = loop_route(disk, &punctures, &enclosed, &spec)?;
                let c = make_loop_translation(disk, &route, chart, &spec)?;
                check_punctures(&c, &punctures, &enclosed)?;
                let cal =
                    calibrate_transport_time(&c.field, disk, disk, (0.5 * area, 2.0 * area), opts)?;
                built.push((enclosed, c.field, cal.time));
                out.calibrations.push(cal);
                built.len() - 1
            }
        };
        let (_, field, time) = &built[at];
        let field = if sign < 0 {
            field.scaled(-1.0)
        } else {
            field.clone()
        };
        out.push(field, *time)?;
    }
    Ok(out)
}

/// Two-stage schedule moving a disk of area `area` once around a single
/// puncture, by a swap to a second disk and a swap back along another pipe.
/// `sign` picks the direction: positive is counterclockwise.
pub fn two_pipe_schedule(
    area: f64,
    sign: i64,
    grid: usize,
    opts: &CalibrationOptions,
) -> Result<Schedule> {
    if sign == 0 {
        return Err(Error::OutOfRange("the sign must be nonzero".into()));
    }
    if !(area > 0.0 && area <= 0.5) {
        return Err(Error::OutOfRange(
            "two pipes need two disjoint disks, so the area is at most 1/2".into(),
        ));
    }
    let (there, home, puncture) = two_pipe_swaps(area, grid)?;
    let window = (0.5 * area, 2.0 * area);
    let a = calibrate_transport_time(&there.field, there.source, there.target, window, opts)?;
    let b = calibrate_transport_time(&home.field, home.source, home.target, window, opts)?;
    let mut out = Schedule::new(there.source, alloc::vec![puncture]);
    out.chart = Some(there.chart);
    if sign < 0 {
        out.push(there.field, a.time)?;
        out.push(home.field, b.time)?;
    } else {
        out.push(home.field.scaled(-1.0), b.time)?;
        out.push(there.field.scaled(-1.0), a.time)?;
    }
    out.calibrations.push(a);
    out.calibrations.push(b);
    Ok(out)
}
