//! Config-driven front end for `zzbound-core`: computes the bounds, runs
//! Monte Carlo certification and parameter sweeps, and writes CSV/JSON.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_bound, cmd_sweep, cmd_verify, RunOptions};
pub use config::RunConfig;
pub use error::CliError;
