//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "problem": { "a": 25.0, "b": 25.0, "y0": [0.998, 0.002] },
//!   "scheme": { "alpha": 1.0, "variant": "cs" },
//!   "run": { "dt": 4.0, "n_steps": 50 },
//!   "outputs": { "directory": "out", "prefix": "fig4", "overwrite": false }
//! }
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use mprk_core::{Linear2x2Pds, SchemeParams, StateVector, Variant};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub scheme: SchemeConfig,
    pub run: RunConfig,
    pub outputs: OutputConfig,
}

/// The 2x2 test problem `y' = [[-a, b], [a, -b]] y`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub a: f64,
    pub b: f64,
    pub y0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub alpha: f64,
    /// `"cs"` or `"ncs"`.
    pub variant: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dt: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    #[serde(default)]
    pub prefix: String,
    #[serde(default)]
    pub overwrite: bool,
}

/// A configuration whose values passed every precondition check.
#[derive(Debug, Clone)]
pub struct IntegrationJob {
    pub problem: Linear2x2Pds,
    pub y0: StateVector,
    pub params: SchemeParams,
    pub dt: f64,
    pub n_steps: usize,
    pub directory: PathBuf,
    pub prefix: String,
    pub overwrite: bool,
}

impl IntegrationJob {
    pub fn output_path(&self) -> PathBuf {
        let name = if self.prefix.is_empty() {
            "trajectory.csv".to_string()
        } else {
            format!("{}_trajectory.csv", self.prefix)
        };
        self.directory.join(name)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<IntegrationJob> {
        let config = |e: mprk_core::Error| CliError::Config(e.to_string());
        let problem = Linear2x2Pds::new(self.problem.a, self.problem.b).map_err(config)?;
        if self.problem.y0.len() != 2 {
            return Err(CliError::Config(format!(
                "problem.y0 must have 2 components, got {}",
                self.problem.y0.len()
            )));
        }
        let y0 = StateVector::new(self.problem.y0.clone()).map_err(config)?;
        y0.ensure_positive().map_err(config)?;
        let variant: Variant = self.scheme.variant.parse().map_err(config)?;
        let params = SchemeParams::new(self.scheme.alpha, variant).map_err(config)?;
        if !(self.run.dt > 0.0) || !self.run.dt.is_finite() {
            return Err(CliError::Config(format!(
                "run.dt must be positive and finite, got {}",
                self.run.dt
            )));
        }
        if self.outputs.prefix.contains(['/', '\\']) {
            return Err(CliError::Config(format!(
                "outputs.prefix must not contain path separators, got {:?}",
                self.outputs.prefix
            )));
        }
        Ok(IntegrationJob {
            problem,
            y0,
            params,
            dt: self.run.dt,
            n_steps: self.run.n_steps,
            directory: self.outputs.directory.clone(),
            prefix: self.outputs.prefix.clone(),
            overwrite: self.outputs.overwrite,
        })
    }
}
