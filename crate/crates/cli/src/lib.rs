//! Experiment driver behind the `lmes` binary: configuration, dispatch,
//! atomic artifact output and the threshold table.

pub mod config;
pub mod output;
pub mod run;
pub mod status;
pub mod table;

pub use config::{CommandKind, ConfigFile, ExperimentConfig, Overrides};
pub use run::{run, Summary};
pub use status::{CliError, Status};
pub use table::{emit_threshold_table, ThresholdRow};
