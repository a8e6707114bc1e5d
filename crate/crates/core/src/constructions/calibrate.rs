use alloc::format;

use crate::flow::{transport_reports, verify_transport, TransportOptions, TransportReport};
use crate::geometry::{Disk, ScalarField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Points of the coarse scan over the window.
    pub coarse: usize,
    /// Golden-section steps on the bracket around the best scan point.
    pub refine: usize,
    /// Largest accepted mismatch, as a fraction of the source area.
    pub threshold: f64,
    /// Transport estimate used by the coarse scan.
    pub scan: TransportOptions,
    /// Transport estimate used by the refinement and the final report.
    pub transport: TransportOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        let transport = TransportOptions::default();
        Self {
            coarse: 16,
            refine: 10,
            threshold: 0.05,
            scan: TransportOptions {
                probe: 128,
                max_boundary_samples: transport.boundary_samples,
                ..transport
            },
            transport,
        }
    }
}

/// Result of [`calibrate_transport_time`].
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub time: f64,
    /// Symmetric difference at `time`.
    pub mismatch: f64,
    /// `mismatch` over the source area.
    pub relative_mismatch: f64,
    pub report: TransportReport,
    /// Number of transport estimates at the full resolution.
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Time in `window` at which the flow of `h` best carries `source` onto
/// `target`: a coarse scan followed by golden-section search on the
/// bracket around its best point. The window must lie in `[A/2, 2A]` for
/// the source area `A`.
pub fn calibrate_transport_time(
    h: &ScalarField,
    source: Disk,
    target: Disk,
    window: (f64, f64),
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    let area = source.area();
    let (t0, t1) = window;
    let slack = 1e-12 * area;
    if !(t0 < t1) || t0 < 0.5 * area - slack || t1 > 2.0 * area + slack {
        return Err(Error::OutOfRange(format!(
            "calibration window [{t0}, {t1}] is not inside [{}, {}]",
            0.5 * area,
            2.0 * area
        )));
    }
    let n = opts.coarse.max(3);
    let times: alloc::vec::Vec<f64> = (0..n)
        .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
        .collect();
    let tol = opts.threshold * area;
    let scan = transport_reports(h, source, target, &times, tol, &opts.scan)?;
    let mut at = 0;
    for (k, r) in scan.iter().enumerate() {
        if r.symmetric_difference < scan[at].symmetric_difference {
            at = k;
        }
    }
    let mut evaluations = 0;
    let mut eval = |t: f64| {
        evaluations += 1;
        verify_transport(h, source, target, t, tol, &opts.transport)
    };
    let mut best = eval(times[at])?;
    let (mut a, mut b) = (times[at.saturating_sub(1)], times[(at + 1).min(n - 1)]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..opts.refine {
        for r in [&fc, &fd] {
            if r.symmetric_difference < best.symmetric_difference {
                best = r.clone();
            }
        }
        if fc.symmetric_difference <= fd.symmetric_difference {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    for r in [fc, fd] {
        if r.symmetric_difference < best.symmetric_difference {
            best = r;
        }
    }
    if best.symmetric_difference > tol {
        return Err(Error::Calibration {
            mismatch: best.symmetric_difference,
            threshold: tol,
        });
    }
    Ok(Calibration {
        time: best.time,
        mismatch: best.symmetric_difference,
        relative_mismatch: best.symmetric_difference / area,
        report: best,
        evaluations,
    })
}
