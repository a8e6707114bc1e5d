//! Explicit Hamiltonians translating disks: the shift, pipe swaps, loop
//! translations and schedules realizing a homology class.

mod calibrate;
mod pipes;
mod ring;
mod schedule;
mod shift;

pub use calibrate::{calibrate_transport_time, Calibration, CalibrationOptions};
pub use pipes::{
    check_punctures, default_loop, default_swap, default_swap_with, loop_route,
    make_loop_translation, make_swap, make_swap_via, puncture_layout, two_pipe_swaps, Construction,
    PipeSpec,
};
pub use ring::Waypoint;
pub use schedule::{schedule_for_class, two_pipe_schedule, Schedule, Stage};
pub use shift::{make_puncture_shift, make_shift, ShiftProfile};
