use alloc::format;

use crate::geometry::{
    parse_field_expression, AnnulusChart, Chart, Disk, PlanarChart, Point, SamplingOptions,
    ScalarField, StarChart,
};
use crate::math::{cos_ramp, sin, PI};
use crate::{Error, Result};

/// The unit shift: `h` on the annulus, cut off in a collar of width `collar`.
pub fn make_shift(collar: f64, grid: usize) -> Result<ScalarField> {
    if !(collar > 0.0 && collar < 0.1) {
        return Err(Error::OutOfRange(format!(
            "collar {collar} must lie in (0, 0.1)"
        )));
    }
    let chart = Chart::Annulus(AnnulusChart {
        collar,
        ..AnnulusChart::with_resolution(grid)
    });
    parse_field_expression("h", &chart, SamplingOptions::default())
}

/// Profile `g(h)` that vanishes for `h <= start`, bends smoothly into slope
/// 1 on `[full, fade_start]` and is faded to 0 on `[fade_start, fade_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftProfile {
    pub start: f64,
    pub full: f64,
    pub fade_start: f64,
    pub fade_end: f64,
}

impl ShiftProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.start
            && self.start < self.full
            && self.full < self.fade_start
            && self.fade_start < self.fade_end
            && self.fade_end < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!(
                "profile {self:?} is not increasing"
            )))
        }
    }

    /// Interval on which `g' = 1`.
    pub fn linear_range(&self) -> (f64, f64) {
        (self.full, self.fade_start)
    }

    pub fn eval(&self, h: f64) -> f64 {
        let w = self.full - self.start;
        let rise = if h <= self.start {
            0.0
        } else if h <= self.full {
            0.5 * ((h - self.start) - w / PI * sin(PI * (h - self.start) / w))
        } else {
            0.5 * w + (h - self.full)
        };
        rise * (1.0 - cos_ramp(h, self.fade_start, self.fade_end))
    }
}

/// `g(h_p)` on a planar chart, where `h_p` is the annulus height of the
/// area-preserving chart of `domain` punctured at `puncture`; 0 outside the
/// domain. Its flow turns counterclockwise around `puncture` at unit
/// `θ`-speed on the linear range of the profile.
pub fn make_puncture_shift(
    chart: PlanarChart,
    domain: Disk,
    puncture: Point,
    profile: ShiftProfile,
) -> Result<ScalarField> {
    profile.validate()?;
    let star = StarChart::new(domain, puncture)?;
    ScalarField::from_fn_autonomous(chart.grid(), |x, y| match star.to_annulus([x, y]) {
        Some([_, h]) => profile.eval(h),
        None => 0.0,
    })
}
