//! Command line driver for `logvoa-core`: JSON file formats, resolution of
//! built-in and file-backed instances, and the reports of each subcommand.

pub mod cli;
pub mod commands;
pub mod format;
pub mod instances;

pub use cli::{run, RunConfig};
