//! Configuration, persistence and subcommands of the `hm3d` driver.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
