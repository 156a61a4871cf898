//! Multipartite recurrence purification acting on LME coefficients.

mod map;
mod schedule;
mod threshold;

pub use map::{purify_color, PurifyOutcome};
pub use schedule::{
    run_schedule, ScheduleDocument, ScheduleRun, ScheduleSpec, TraceRow, Verdict,
    DEFAULT_CONVERGENCE_EPS, DEFAULT_DIVERGENCE_WINDOW, DEFAULT_MAX_ROUNDS,
};
pub use threshold::{find_threshold, Probe, ThresholdReport, DEFAULT_TOLERANCE};
