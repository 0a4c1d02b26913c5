//! Operator surface for the detector: subcommands, the run directory and
//! the HTTP labeling service.

pub mod api;
pub mod cli;
pub mod commands;
pub mod config;
pub mod rundir;
pub mod session;

pub use cli::{Cli, Command};
pub use commands::{dispatch, exit_code, Failure};
