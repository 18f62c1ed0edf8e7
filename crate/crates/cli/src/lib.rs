//! The `critnls` command line: declarative configs, run manifests, atomic
//! run directories with JSON reports and SVG plots.

pub mod app;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod plot;
pub mod run;

pub use config::{Experiment, ExperimentConfig, SolveConfig};
pub use error::{CliError, Result};
pub use manifest::{Command, Request, RunManifest, VersionStamp};
pub use run::{exit_code, run, run_config, Outcome};
