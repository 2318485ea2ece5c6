//! Pulse timing of the (LMT) interferometer and the acceleration phase it
//! accumulates, computed by propagating both arms through the schedule.
//!
//! Event layout for LMT order n, drift time T, microwave gap 2T₀ and LMT
//! spacing τ (upper-arm kick in brackets):
//!
//! | pulse | time | kick |
//! |-------|------|------|
//! | A_j   | (j−1)τ | +1 |
//! | B₋ⱼ   | T + (n−j)τ | −1 |
//! | MW π  | T + T₀ | 0 |
//! | B_j   | T + 2T₀ − (n−j)τ | −1 |
//! | C₋ⱼ   | 2T + 2T₀ − (j−1)τ | +1 |
//!
//! The lower arm always receives the opposite kick. The B blocks mirror
//! about the microwave pulse, which needs T₀ ≥ (n−1)τ.

mod geometry;
mod schedule;

pub use geometry::InterferometerGeometry;
pub use schedule::{
    build_schedule, compute_phase, lmt_approximation_error, EventLabel, LmtApproximation,
    PulseEvent, PulseSchedule, LMT_FLAG_THRESHOLD,
};
