//! Command-line front end: figure curves, parameter sweeps, comparison
//! reports against the quadrature oracle, and their serialization.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{exit, CliError};
