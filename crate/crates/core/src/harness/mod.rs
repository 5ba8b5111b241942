//! Experiment configuration, orchestration and output files.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind, Resolved, Setting};
pub use output::{emit_outputs, Artifacts, Format, Line, Series, Table};
pub use experiments::{profile, run_experiment, simulate, Outcome};
