//! Browser bindings for three interactive views of `mixent`:
//!
//! * the mixture law of the same-label neighbor count,
//! * the exact density and CDF of the `k`-th neighbor distance for a
//!   standard normal feature,
//! * one seeded estimate of `H(Y|X)` for a one-dimensional logistic model
//!   next to its quadrature ground truth.
//!
//! Each binding wraps a plain function that the native tests call directly.

use mixent::lemma_lab::{knn_distance_cdf, knn_distance_density};
use mixent::models::{DistanceLaw, LogisticGaussianSpec};
use mixent::{conditional_entropy, conditional_xi_law, sample, true_conditional_entropy, EstimatorConfig, KRule};
use mixent::{Model, ModelSpec};
use wasm_bindgen::prelude::*;

fn logistic_1d(weight: f64, intercept: f64) -> Result<Model, String> {
    Model::new(ModelSpec::LogisticGaussian(LogisticGaussianSpec::standard(vec![weight], intercept)))
        .map_err(|e| e.to_string())
}

/// Probabilities of `xi = 0..=k`.
pub fn xi_law_pmf(k: usize, p: f64, alpha: f64) -> Result<Vec<f64>, String> {
    conditional_xi_law(k, p, alpha).map(|law| law.pmf).map_err(|e| e.to_string())
}

/// `points` grid radii with the density and CDF of the `k`-th neighbor
/// distance from `x` among `n - 1` standard normal draws, flattened as
/// `[u0, h0, F0, u1, h1, F1, ...]`.
pub fn radius_curve_values(n: usize, k: usize, x: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least 2 grid points".into());
    }
    let model = logistic_1d(0.0, 0.0)?;
    let law = DistanceLaw::new(&model, &[x]).map_err(|e| e.to_string())?;
    // Radius where the k-th neighbor distance is almost surely smaller.
    let mut upper = 0.25;
    while knn_distance_cdf(law.cdf(upper), n, k).map_err(|e| e.to_string())? < 1.0 - 1e-6 && upper < 64.0 {
        upper *= 1.25;
    }
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let u = upper * i as f64 / (points - 1) as f64;
        let h = knn_distance_density(|v| law.cdf(v), |v| law.density(v), n, k, u).map_err(|e| e.to_string())?;
        let f = knn_distance_cdf(law.cdf(u), n, k).map_err(|e| e.to_string())?;
        out.extend([u, h, f]);
    }
    Ok(out)
}

/// `[estimate, ground truth, k]` for `n` seeded draws from the model
/// `X ~ N(0, 1)`, `P(Y = 1 | x) = sigmoid(weight x + intercept)`. A `k` of
/// zero selects the default schedule.
pub fn logistic_estimate_values(
    weight: f64,
    intercept: f64,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let model = logistic_1d(weight, intercept)?;
    let data = sample(&model, n, seed).map_err(|e| e.to_string())?;
    let config =
        if k == 0 { EstimatorConfig::default() } else { EstimatorConfig { k: KRule::Fixed(k), ..Default::default() } };
    let est = conditional_entropy(&data, &config).map_err(|e| e.to_string())?;
    let truth = true_conditional_entropy(&model, 1e-8).map_err(|e| e.to_string())?;
    Ok(vec![est.value, truth.value, est.k_used as f64])
}

#[wasm_bindgen]
pub fn xi_law(k: usize, p: f64, alpha: f64) -> Result<Vec<f64>, JsError> {
    xi_law_pmf(k, p, alpha).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn radius_curve(n: usize, k: usize, x: f64, points: usize) -> Result<Vec<f64>, JsError> {
    radius_curve_values(n, k, x, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn logistic_estimate(weight: f64, intercept: f64, n: usize, k: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    logistic_estimate_values(weight, intercept, n, k, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_law_is_a_distribution() {
        let pmf = xi_law_pmf(4, 0.3, 0.6).unwrap();
        assert_eq!(pmf.len(), 5);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // alpha = 1: Binomial(k - 1, p) on 0..k-1.
        let pmf = xi_law_pmf(2, 0.25, 1.0).unwrap();
        assert!((pmf[0] - 0.75).abs() < 1e-15 && (pmf[1] - 0.25).abs() < 1e-15 && pmf[2] == 0.0);
        assert!(xi_law_pmf(0, 0.5, 0.5).is_err());
    }

    #[test]
    fn radius_curve_for_one_neighbor() {
        // n = 2, k = 1: the distance |Z - x| itself.
        let v = radius_curve_values(2, 1, 0.0, 50).unwrap();
        assert_eq!(v.len(), 150);
        for c in v.chunks(3) {
            let u = c[0];
            let pdf = 2.0 * (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!((c[1] - pdf).abs() < 1e-12, "{u}");
        }
        let last = &v[v.len() - 3..];
        assert!(last[2] > 1.0 - 1e-6);
        assert!(v.chunks(3).zip(v.chunks(3).skip(1)).all(|(a, b)| b[2] >= a[2]));
    }

    #[test]
    fn estimate_near_truth() {
        let v = logistic_estimate_values(4.0, 0.0, 4000, 0, 1).unwrap();
        assert_eq!(v[2], 63.0);
        assert!((v[0] - v[1]).abs() < 0.05, "{v:?}");
        assert!(logistic_estimate_values(1.0, 0.0, 1, 0, 1).is_err());
    }
}
