//! Command-line driver: configuration, CSV ingestion, experiment runners and
//! atomic output.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;

pub use commands::{execute, run_experiment, write_outputs, Outcome};
pub use config::{parse_config, Command, ExperimentConfig, Overrides};
pub use data::load_csv_dataset;
pub use error::{CliError, CliResult};
