//! Experiment runner for the `nuosc` simulator: configuration, presets and
//! the `evolve`, `gate-counts`, `tomography` and `dn-scan` pipelines.

pub mod config;
pub mod error;
pub mod evolve;
pub mod gates;
pub mod output;
pub mod presets;
pub mod scan;
pub mod tomo;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
