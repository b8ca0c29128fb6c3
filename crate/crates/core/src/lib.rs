//! # mixent
//!
//! Nearest-neighbor estimation of the conditional Shannon entropy `H(Y|X)`
//! when `X` is a continuous vector in `R^d` and `Y` takes finitely many
//! values, plus the tooling needed to check the estimator against exact
//! answers:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`spatial`] | exact kd-tree k-NN and closed-ball queries, brute-force reference |
//! | [`estimator`] | `H(Y|X)` estimator, plug-in `H(Y)`, mutual information, Kozachenko-Leonenko baseline |
//! | [`models`] | logistic-Gaussian and class-Gaussian generators, posteriors, ground truth |
//! | [`lemma_lab`] | exact conditional laws of the neighbor statistics and Monte Carlo checks |
//! | [`harness`] | seeded bias/MSE convergence studies and feature ranking |
//!
//! All entropies are in nats.
//!
//! ```
//! use mixent::{conditional_entropy, Dataset, EstimatorConfig, PointSet};
//!
//! let x = PointSet::new(vec![0.0, 1.0, 2.5, 10.0], 1).unwrap();
//! let data = Dataset::from_labels(x, vec![0, 1, 0, 1]).unwrap();
//! let h = conditional_entropy(&data, &EstimatorConfig::fixed(2)).unwrap();
//! assert_eq!(h.value, 2f64.ln() / 4.0);
//! ```

pub mod error;
pub mod estimator;
pub mod harness;
pub mod lemma_lab;
pub mod models;
pub mod numeric;
mod par;
pub mod rng;
pub mod spatial;

pub use error::{Error, Result};
pub use estimator::{
    baseline_conditional_entropy, conditional_entropy, kl_differential_entropy, label_entropy, mutual_information,
    resolve_k, xi_statistic, Dataset, EstimateResult, EstimatorConfig, KRule,
};
pub use harness::{rank_features, run_convergence, ConvergenceReport, EstimatorKind, ExperimentPlan, FeatureRanking};
pub use lemma_lab::{
    conditional_xi_law, knn_distance_density, verify_conditional_law, verify_distance_distribution, LawCheck,
};
pub use models::{sample, true_conditional_entropy, GroundTruth, Model, ModelSpec};
pub use spatial::{PointSet, SpatialIndex};
