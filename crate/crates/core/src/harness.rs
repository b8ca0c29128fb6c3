//! Seeded convergence experiments and mutual-information feature ranking.
//!
//! Each `(n, replicate)` pair draws its dataset from its own random stream,
//! so reports are identical for any worker count or scheduling order.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimator::{
    baseline_conditional_entropy, conditional_entropy, mutual_information, resolve_k, Dataset, EstimatorConfig,
};
use crate::models::{true_conditional_entropy, GroundTruth, Model, ModelSpec, DEFAULT_TOLERANCE};
use crate::numeric::pairwise_sum;
use crate::par::map_range;
use crate::rng::{substream, Purpose};

pub const REPORT_SCHEMA: &str = "mixent.convergence/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Same-label nearest-neighbor count estimator.
    KnnConditional,
    /// `H(Y) - H(X) + sum_y p(y) H(X | y)` with Kozachenko-Leonenko terms.
    DifferenceBaseline,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::KnnConditional => "knn-conditional",
            EstimatorKind::DifferenceBaseline => "difference-baseline",
        }
    }
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::KnnConditional]
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub n_grid: Vec<usize>,
    /// Neighbor rule and estimator options shared by every grid point.
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default = "default_tolerance")]
    pub ground_truth_tolerance: f64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(invalid("n_grid is empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_grid must be strictly ascending"));
        }
        if self.replicates < 2 {
            return Err(invalid(format!("need at least 2 replicates, got {}", self.replicates)));
        }
        if self.estimators.is_empty() {
            return Err(invalid("no estimators selected"));
        }
        for &n in &self.n_grid {
            resolve_k(n, &self.estimator).map_err(|e| invalid(format!("n = {n}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub estimator: EstimatorKind,
    /// Successful replicates.
    pub replicates: usize,
    pub failures: usize,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    /// Standard error of `mean`.
    pub std_error: f64,
    /// Successful replicate estimates in replicate order.
    pub estimates: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub plan: ExperimentPlan,
    pub ground_truth: GroundTruth,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn row(&self, n: usize, estimator: EstimatorKind) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n == n && r.estimator == estimator)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per `(n, estimator)`; full-precision values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,estimator,replicates,failures,mean,bias,mse,std_error,ground_truth\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:?},{:?},{:?},{:?},{:?}",
                r.n,
                r.k,
                r.estimator.name(),
                r.replicates,
                r.failures,
                r.mean,
                r.bias,
                r.mse,
                r.std_error,
                self.ground_truth.value
            );
        }
        out
    }
}

fn summarize(n: usize, k: usize, estimator: EstimatorKind, outcomes: Vec<Result<f64>>, truth: f64) -> ConvergenceRow {
    let mut estimates = Vec::with_capacity(outcomes.len());
    let mut failures = 0;
    let mut first_failure = None;
    for o in outcomes {
        match o {
            Ok(v) => estimates.push(v),
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let count = estimates.len() as f64;
    let mean = pairwise_sum(&estimates) / count;
    let sq_err: Vec<f64> = estimates.iter().map(|v| (v - truth) * (v - truth)).collect();
    let dev: Vec<f64> = estimates.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&dev) / (count - 1.0);
    ConvergenceRow {
        n,
        k,
        estimator,
        replicates: estimates.len(),
        failures,
        mean,
        bias: mean - truth,
        mse: pairwise_sum(&sq_err) / count,
        std_error: (variance / count).sqrt(),
        estimates,
        first_failure,
    }
}

/// Runs every estimator on `replicates` fresh datasets per grid point and
/// tabulates mean, bias, MSE and standard error against the ground truth.
pub fn run_convergence(plan: &ExperimentPlan) -> Result<ConvergenceReport> {
    plan.validate()?;
    let model = Model::new(plan.model.clone())?;
    let truth = true_conditional_entropy(&model, plan.ground_truth_tolerance).map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("ground truth: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("ground truth: {m}")),
        other => other,
    })?;
    let reps = plan.replicates;
    let jobs = plan.n_grid.len() * reps;
    let results: Vec<Vec<Result<f64>>> = map_range(jobs, |job| {
        let n = plan.n_grid[job / reps];
        let r = job % reps;
        let mut rng = substream(plan.base_seed, Purpose::Dataset, &[n as u64, r as u64]);
        let dataset = match model.sample_with(n, &mut rng) {
            Ok(d) => d,
            Err(e) => return plan.estimators.iter().map(|_| Err(e.clone())).collect(),
        };
        plan.estimators
            .iter()
            .map(|kind| match kind {
                EstimatorKind::KnnConditional => conditional_entropy(&dataset, &plan.estimator).map(|r| r.value),
                EstimatorKind::DifferenceBaseline => {
                    resolve_k(n, &plan.estimator).and_then(|k| baseline_conditional_entropy(&dataset, k))
                }
            })
            .collect()
    });
    let mut rows = Vec::new();
    for (gi, &n) in plan.n_grid.iter().enumerate() {
        let k = resolve_k(n, &plan.estimator)?;
        for (ei, &kind) in plan.estimators.iter().enumerate() {
            let outcomes = results[gi * reps..(gi + 1) * reps].iter().map(|per| per[ei].clone()).collect();
            rows.push(summarize(n, k, kind, outcomes, truth.value));
        }
    }
    Ok(ConvergenceReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        plan: plan.clone(),
        ground_truth: truth,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureScore {
    /// Zero-based column index.
    pub feature: usize,
    pub mutual_information: f64,
    /// One-based rank.
    pub rank: usize,
    /// Constant column; the density assumption behind the estimate fails.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRanking {
    /// Sorted by decreasing mutual information, then increasing index.
    pub features: Vec<FeatureScore>,
    pub k_used: usize,
}

/// Ranks features by the estimated mutual information between each single
/// column and the labels.
pub fn rank_features(dataset: &Dataset, config: &EstimatorConfig) -> Result<FeatureRanking> {
    let k = resolve_k(dataset.len(), config)?;
    let mut features = Vec::with_capacity(dataset.dim());
    for j in 0..dataset.dim() {
        let column = dataset.project(j)?;
        let values = column.features().as_slice();
        let degenerate = values.iter().all(|&v| v == values[0]);
        features.push(FeatureScore {
            feature: j,
            mutual_information: mutual_information(&column, config)?,
            rank: 0,
            degenerate,
        });
    }
    features.sort_by(|a, b| b.mutual_information.total_cmp(&a.mutual_information).then(a.feature.cmp(&b.feature)));
    for (i, f) in features.iter_mut().enumerate() {
        f.rank = i + 1;
    }
    Ok(FeatureRanking { features, k_used: k })
}

/// Stream for the `run`-th ranking dataset of a seeded study.
pub fn ranking_dataset(model: &Model, n: usize, seed: u64, run: u64) -> Result<Dataset> {
    let mut rng = substream(seed, Purpose::Ranking, &[n as u64, run]);
    model.sample_with(n, &mut rng)
}
