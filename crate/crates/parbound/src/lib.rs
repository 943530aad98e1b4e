//! File formats and the command line front end of `parbound-core`.
//!
//! Configurations are JSON; every artifact is a CSV whose first line is a `#`
//! comment carrying the SHA-256 digest of the configuration. Each run also
//! leaves a `manifest.json` with the wall time and the list of outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, Invocation, OracleOverrides};
pub use error::{CliError, Result};
