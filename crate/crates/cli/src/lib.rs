//! Configuration loading, run orchestration and output for the `radhydro`
//! command-line tool.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, load_config_for, ConfigError, Mode, RunConfig};
pub use run::{run, RunError, RunOutput, RunSummary};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "RADHYDRO_OUT";
