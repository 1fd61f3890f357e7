//! Experiment runner for the MPRK22 integrators: JSON-configured
//! integrations, stability-region rasters, convergence tables and the named
//! reproductions of the test-problem experiments, all written as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, IntegrationJob};
pub use error::{CliError, Result};
pub use experiments::{
    run_convergence, run_integration, run_named, ConvergenceRow, ConvergenceTable, NamedExperiment,
};
pub use output::{write_file, write_files, OutputFile};
