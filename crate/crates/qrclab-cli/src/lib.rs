//! Command-line front end for the qrclab experiments: configuration
//! resolution, execution, and bit-stable CSV/JSON emission.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_cli, Cli, Experiment, OutputFormat, RunConfig};
pub use run::run;
