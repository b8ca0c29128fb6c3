//! Versioned JSON configuration files.
//!
//! A run configuration holds a model, an optional estimator section and the
//! experiment plan. A model file holds only the model. Both carry a
//! `schema` string and reject unknown keys.
//!
//! ```json
//! {
//!   "schema": "mixent.run/1",
//!   "model": {"family": "logistic_gaussian", "mean": [0, 0], "covariance": [[1, 0], [0, 1]],
//!             "weights": [1, -1], "intercept": 0.3},
//!   "estimator": {"k": {"schedule": {"alpha": 0.5, "c": 1.0}}},
//!   "plan": {"n_grid": [500, 2000], "replicates": 50}
//! }
//! ```

use std::path::Path;

use mixent::{EstimatorConfig, EstimatorKind, ExperimentPlan, ModelSpec};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::CliError;

pub const RUN_SCHEMA: &str = "mixent.run/1";
pub const MODEL_SCHEMA: &str = "mixent.model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<EstimatorKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub plan: PlanSection,
}

impl RunConfigFile {
    /// The experiment plan with the given base seed.
    pub fn into_plan(self, base_seed: u64) -> ExperimentPlan {
        let mut plan = ExperimentPlan {
            model: self.model,
            n_grid: self.plan.n_grid,
            estimator: self.estimator,
            replicates: self.plan.replicates,
            base_seed,
            estimators: vec![EstimatorKind::KnnConditional],
            ground_truth_tolerance: mixent::models::DEFAULT_TOLERANCE,
        };
        if let Some(e) = self.plan.estimators {
            plan.estimators = e;
        }
        if let Some(t) = self.plan.ground_truth_tolerance {
            plan.ground_truth_tolerance = t;
        }
        plan
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub model: ModelSpec,
}

fn parse_versioned<T: DeserializeOwned>(text: &str, expected: &str, what: &str) -> Result<T, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    match value.get("schema").and_then(|s| s.as_str()) {
        None => return Err(CliError::Input(format!("{what}: missing \"schema\" field (expected \"{expected}\")"))),
        Some(s) if s != expected => {
            return Err(CliError::Input(format!("{what}: unsupported schema \"{s}\" (expected \"{expected}\")")))
        }
        Some(_) => {}
    }
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub fn parse_run_config(text: &str) -> Result<RunConfigFile, CliError> {
    parse_versioned(text, RUN_SCHEMA, "run config")
}

pub fn parse_model_file(text: &str) -> Result<ModelFile, CliError> {
    parse_versioned(text, MODEL_SCHEMA, "model file")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_run_config(path: &Path) -> Result<RunConfigFile, CliError> {
    parse_run_config(&read(path)?)
}

pub fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    Ok(parse_model_file(&read(path)?)?.model)
}
