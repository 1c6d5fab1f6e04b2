//! Reproduction harness: run configuration, artifact writers and the
//! `voxkv` subcommands.

pub mod commands;
pub mod config;
mod error;

pub use config::RunConfig;
pub use error::CliError;
