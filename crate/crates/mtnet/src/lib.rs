//! Command-line companion to `mtnet-core`: configuration, file formats,
//! parallel study execution and run manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod plot;

pub use commands::{execute, RunSummary};
pub use config::RunConfig;
pub use error::{AppError, Result};
