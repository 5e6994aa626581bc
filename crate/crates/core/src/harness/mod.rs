//! Experiment harness: config parsing, runners and CSV output.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{
    parse_config, parse_config_str, ExperimentConfig, ExperimentKind, ExperimentSpec,
};
pub use experiments::{run_experiment, write_output, ExperimentOutput};
pub use output::Table;
