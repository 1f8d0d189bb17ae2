//! Batch front end for the uplink throughput bounds: configuration,
//! parameter sweeps, verification, CSV and SVG output and a result cache.
//!
//! - [`config`]: parsing and validation of experiment files.
//! - [`spec`]: the validated run description.
//! - [`sweep`]: point evaluation and the emission-time ordering guard.
//! - [`output`]: result rows and CSV text.
//! - [`svg`]: line charts.
//! - [`cache`]: content-addressed CSV store.
//! - [`verify`]: oracle-backed checks.
//! - [`app`]: command-line parsing and dispatch.

pub mod app;
pub mod cache;
pub mod config;
pub mod error;
pub mod output;
pub mod spec;
pub mod svg;
pub mod sweep;
pub mod verify;

pub use error::{CliError, CliResult};
