//! File formats, run configuration and subcommands of the `ltlab` tool.
//!
//! The numerical work lives in [`ltlab_core`]; this crate reads ensembles
//! and configs, drives the core, and writes JSON, CSV and text reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod table;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};
