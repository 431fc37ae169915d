//! Command-line front-end for `lipdyn-core`: map-config parsing, JSON
//! reports with run manifests, and CSV output for plotting.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod table;

pub use config::{parse_map_config, System};
pub use error::CliError;
pub use report::{Report, Status};
