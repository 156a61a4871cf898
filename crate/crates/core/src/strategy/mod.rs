//! Indirect routes to an LME state: cutting noisy copies into smaller graph
//! or Bell states by Z measurements, reconnecting pure pieces, and building
//! non-regular states from regular parts.

mod compose;
mod connect;
mod cut;
mod indirect;

pub use compose::{
    compose_nonregular, execute_plan, nonregular_shortcut, CompositionPlan, MergeStep,
    RegularPart, ShortcutScenario,
};
pub use connect::{p_connect, p_connect_mixed, q_connect, q_connect_within, LabeledState};
pub use cut::{
    measurement, residual_fidelity, survivor_index, z_measure_cut, CutOutcome, CutPlan,
    ZMeasurement, ZOutcome,
};
pub use indirect::{
    bipartite_cut_plan, graph_cut_plans, indirect_threshold, IndirectReport, IndirectStrategy,
    SubStateThreshold,
};
