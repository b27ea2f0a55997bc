//! Configuration, orchestration and file output for `nlse-core`.
//!
//! A run reads one TOML document, dispatches to a solver mode, and writes CSV
//! tables plus a `manifest.json` with checksums of every file. Sweeps step one
//! config field through a list of values on a worker pool and merge the
//! results in axis order, so outputs do not depend on scheduling.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Mode};
pub use error::TransportError;
pub use output::RunManifest;
pub use run::{run, RunOptions};

/// Environment variable holding the default sweep worker count.
pub const WORKERS_ENV: &str = "NLSE_TRANSPORT_WORKERS";
