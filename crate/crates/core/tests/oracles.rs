//! Estimators and probability oracles checked against independent
//! computations written here from first principles.

use std::f64::consts::{LN_2, PI};

use mixent::estimator::{baseline_conditional_entropy, kl_differential_entropy, label_entropy};
use mixent::lemma_lab::{median_knn_radius, tv_distance};
use mixent::models::{ball_label_probability, sphere_label_probability, LogisticGaussianSpec, OracleMethod};
use mixent::{
    conditional_xi_law, mutual_information, run_convergence, sample, true_conditional_entropy, verify_conditional_law,
    EstimatorConfig, ExperimentPlan, LawCheck, Model, ModelSpec, PointSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn logistic(weights: &[f64], intercept: f64) -> Model {
    Model::new(ModelSpec::LogisticGaussian(LogisticGaussianSpec::standard(weights.to_vec(), intercept))).unwrap()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[test]
fn kl_entropy_of_standard_normal_and_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let normal: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    let h = kl_differential_entropy(&PointSet::new(normal, 1).unwrap(), 10).unwrap();
    let exact = 0.5 * (2.0 * PI * std::f64::consts::E).ln();
    assert!((h.value - exact).abs() < 0.05, "{} vs {exact}", h.value);

    let uniform: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let h = kl_differential_entropy(&PointSet::new(uniform, 1).unwrap(), 10).unwrap();
    assert!(h.value.abs() < 0.05, "{}", h.value);

    // Two independent unit normals: entropy ln(2 pi e).
    let pairs: Vec<f64> = (0..20_000).map(|_| rng.sample(StandardNormal)).collect();
    let h = kl_differential_entropy(&PointSet::new(pairs, 2).unwrap(), 10).unwrap();
    assert!((h.value - 2.0 * exact).abs() < 0.05, "{}", h.value);
}

#[test]
fn baseline_under_independence() {
    let model = logistic(&[0.0, 0.0], 0.0);
    let ds = sample(&model, 4000, 17).unwrap();
    let b = baseline_conditional_entropy(&ds, 10).unwrap();
    assert!((b - LN_2).abs() < 0.05, "{b}");
}

/// Plain Monte Carlo of E[h(sigmoid(w X + b))] with X ~ N(0, 1).
fn logistic_1d_monte_carlo(w: f64, b: f64, draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..draws {
        let x: f64 = rng.sample(StandardNormal);
        let h = binary_entropy(sigmoid(w * x + b));
        sum += h;
        sq += h * h;
    }
    let n = draws as f64;
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / n).sqrt())
}

#[test]
fn logistic_ground_truth_matches_monte_carlo() {
    let model = logistic(&[4.0], 0.0);
    let truth = true_conditional_entropy(&model, 1e-10).unwrap();
    assert_eq!(truth.method, OracleMethod::Quadrature);
    assert!(truth.error_bound <= 1e-10);
    let (mc, se) = logistic_1d_monte_carlo(4.0, 0.0, 10_000_000, 7);
    assert!((truth.value - mc).abs() <= 3.0 * se, "{} vs {mc} +- {se}", truth.value);
    // Frozen reference for regression.
    assert!((truth.value - 0.290_851_683_821).abs() < 1e-11, "{:.12}", truth.value);

    // A three-dimensional model reduces to one dimension along w.
    let model = logistic(&[1.0, -1.0, 0.5], 0.3);
    let truth = true_conditional_entropy(&model, 1e-10).unwrap();
    let (mc, se) = logistic_1d_monte_carlo(1.5, 0.3, 4_000_000, 8);
    assert!((truth.value - mc).abs() <= 3.0 * se, "{} vs {mc} +- {se}", truth.value);
}

#[test]
fn ball_probability_matches_rejection_sampler() {
    let model = logistic(&[4.0], 0.0);
    let p = ball_label_probability(&model, &[0.5], 0, 0.25, 1e-9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut hits, mut sum, mut sq) = (0usize, 0.0, 0.0);
    let mut draws = 0;
    while hits < 1_000_000 {
        draws += 1;
        let x: f64 = rng.sample(StandardNormal);
        if (x - 0.5).abs() <= 0.25 {
            let s = sigmoid(4.0 * x);
            hits += 1;
            sum += s;
            sq += s * s;
        }
    }
    let n = hits as f64;
    let mean = sum / n;
    let se = ((sq / n - mean * mean) / n).sqrt();
    assert!(draws > hits);
    assert!((p.value - mean).abs() <= 3.0 * se + p.error_bound, "{} vs {mean} +- {se}", p.value);
}

#[test]
fn sphere_probability_matches_angular_quadrature() {
    let model = logistic(&[2.0, -1.0], 0.2);
    let x = [0.3, 0.1];
    for t in [0.2, 0.5, 1.5] {
        // Periodic trapezoid rule over the circle.
        let steps = 4096;
        let (mut num, mut den) = (0.0, 0.0);
        for s in 0..steps {
            let a = 2.0 * PI * s as f64 / steps as f64;
            let (u, v) = (x[0] + t * a.cos(), x[1] + t * a.sin());
            let f = normal_pdf(u) * normal_pdf(v);
            num += f * sigmoid(2.0 * u - v + 0.2);
            den += f;
        }
        let exact = num / den;
        let p = sphere_label_probability(&model, &x, 0, t, 1e-3).unwrap();
        assert!((p.value - exact).abs() <= 4.0 * p.error_bound + 1e-4, "t={t}: {} vs {exact}", p.value);
        let q = sphere_label_probability(&model, &x, 1, t, 1e-3).unwrap();
        assert!((q.value - (1.0 - exact)).abs() <= 4.0 * q.error_bound + 1e-4);
    }
}

#[test]
fn ball_probability_in_two_dimensions_matches_polar_quadrature() {
    let model = logistic(&[2.0, -1.0], 0.2);
    let x = [0.3, 0.1];
    let t = 0.6;
    let (radial, angular) = (400, 1024);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..radial {
        // Midpoint rule in r with the polar Jacobian.
        let r = t * (i as f64 + 0.5) / radial as f64;
        for s in 0..angular {
            let a = 2.0 * PI * s as f64 / angular as f64;
            let (u, v) = (x[0] + r * a.cos(), x[1] + r * a.sin());
            let f = normal_pdf(u) * normal_pdf(v) * r;
            num += f * sigmoid(2.0 * u - v + 0.2);
            den += f;
        }
    }
    let exact = num / den;
    let p = ball_label_probability(&model, &x, 0, t, 1e-3).unwrap();
    assert!((p.value - exact).abs() <= 4.0 * p.error_bound + 1e-4, "{} vs {exact}", p.value);
}

#[test]
fn mutual_information_of_sharp_logistic() {
    let model = logistic(&[4.0], 0.0);
    let truth = LN_2 - true_conditional_entropy(&model, 1e-10).unwrap().value;
    let ds = sample(&model, 20_000, 31).unwrap();
    let mi = mutual_information(&ds, &EstimatorConfig::default()).unwrap();
    assert!((mi - truth).abs() < 0.03, "{mi} vs {truth}");
    let hy = label_entropy(ds.labels()).unwrap();
    assert!((hy - LN_2).abs() < 1e-3);
}

#[test]
fn conditional_law_with_informative_posterior() {
    let model = logistic(&[4.0], 0.0);
    for (x, k) in [(0.3, 3usize), (-0.6, 5)] {
        let t = median_knn_radius(&model, &[x], 150, k, 2001, 41).unwrap();
        let mut check = LawCheck::new(vec![x], 0, 150, k, t, t / 10.0, 60_000, 43);
        check.min_hits = 2000;
        let report = verify_conditional_law(&model, &check).unwrap();
        assert!(report.tv_distance <= 0.05, "x={x} k={k}: {}", report.tv_distance);
        // Off the decision boundary the posterior is informative.
        assert!(report.ball_probability.value != 0.5);
    }
}

#[test]
fn empirical_law_rejects_the_wrong_radius() {
    let model = logistic(&[4.0], 0.0);
    let x = 0.4;
    let k = 4;
    let t = median_knn_radius(&model, &[x], 60, k, 2001, 51).unwrap();
    let check = LawCheck { min_hits: 2000, ..LawCheck::new(vec![x], 0, 60, k, t, t / 10.0, 120_000, 53) };
    let report = verify_conditional_law(&model, &check).unwrap();
    assert!(report.tv_distance <= 0.05, "{}", report.tv_distance);
    let far = 4.0 * t;
    let p = ball_label_probability(&model, &[x], 0, far, 1e-9).unwrap().value;
    let s = sphere_label_probability(&model, &[x], 0, far, 1e-9).unwrap().value;
    let wrong = conditional_xi_law(k, p, 1.0 - s).unwrap();
    let tv_wrong = tv_distance(&report.empirical_pmf, &wrong.pmf);
    assert!(tv_wrong > 3.0 * report.tv_distance && tv_wrong > 0.05, "{tv_wrong} vs {}", report.tv_distance);
}

#[test]
fn narrower_shells_track_the_mixture() {
    // Replicates scale with 1 / delta so every shell collects a similar
    // number of hits.
    let model = logistic(&[8.0], 0.0);
    let (x, n, k) = (0.2, 20, 4);
    let t = median_knn_radius(&model, &[x], n, k, 2001, 1).unwrap();
    let mut tvs = Vec::new();
    for frac in [0.9, 0.3, 0.1] {
        let replicates = (144_000.0 / frac) as usize;
        let check = LawCheck { min_hits: 2000, ..LawCheck::new(vec![x], 0, n, k, t, frac * t, replicates, 5) };
        tvs.push(verify_conditional_law(&model, &check).unwrap().tv_distance);
    }
    assert!(tvs[0] >= tvs[1] && tvs[1] >= tvs[2], "{tvs:?}");
    assert!(tvs[2] <= 0.05);
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn replicate_streams_are_uncorrelated() {
    let plan = ExperimentPlan {
        model: ModelSpec::LogisticGaussian(LogisticGaussianSpec::standard(vec![1.0, -1.0], 0.0)),
        n_grid: vec![100, 101],
        estimator: EstimatorConfig::fixed(5),
        replicates: 1000,
        base_seed: 77,
        estimators: vec![mixent::harness::EstimatorKind::KnnConditional],
        ground_truth_tolerance: 1e-8,
    };
    let report = run_convergence(&plan).unwrap();
    let a = &report.rows[0].estimates;
    let b = &report.rows[1].estimates;
    // Same replicate index, neighboring sample sizes.
    assert!(correlation(a, b).abs() < 0.1, "{}", correlation(a, b));
    // Consecutive replicates within a grid point.
    assert!(correlation(&a[..999], &a[1..]).abs() < 0.1);
}
