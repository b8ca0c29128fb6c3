//! Generative mixed-pair models with analytic posteriors.
//!
//! Two families are supported:
//!
//! * **logistic-Gaussian**: `X ~ N(a, S)` and `P(Y = 1 | X = x) = sigmoid(<w, x> + b)`,
//!   with labels `1` and `2` stored as ids `0` and `1`;
//! * **class-Gaussian**: `Y ~ priors` and `X | Y = y ~ N(a_y, S_y)`.
//!
//! Ground-truth `H(Y|X)` for the logistic family reduces to a one-dimensional
//! Gaussian expectation of the binary entropy of `sigmoid(T)`,
//! `T = <w, X> + b ~ N(<w, a> + b, w' S w)`, which is integrated by adaptive
//! quadrature. The class-Gaussian family has no such reduction and is
//! estimated by Monte Carlo with a reported standard error.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::estimator::Dataset;
use crate::numeric::{
    cholesky, entropy_of, integrate, log_sum_exp, logit_binary_entropy, pairwise_sum, sigmoid, std_normal_cdf,
    std_normal_pdf,
};
use crate::par::map_range;
use crate::rng::{substream, Purpose, StreamRng};
use crate::spatial::PointSet;

/// Default absolute tolerance for ground-truth quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Quadrature window in standard deviations of `T`.
const QUADRATURE_HALF_WIDTH: f64 = 10.0;

/// Seed of the fixed streams used by Monte Carlo oracles.
const ORACLE_SEED: u64 = 0x5EED_0F_0AC1E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticGaussianSpec {
    pub mean: Vec<f64>,
    /// Row-major rows of the covariance matrix.
    pub covariance: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticGaussianSpec {
    /// `X ~ N(0, I_d)` with the given weights and intercept.
    pub fn standard(weights: Vec<f64>, intercept: f64) -> Self {
        let d = weights.len();
        Self { mean: vec![0.0; d], covariance: identity(d), weights, intercept }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassGaussianSpec {
    pub priors: Vec<f64>,
    pub classes: Vec<GaussianComponent>,
}

/// Serializable description of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    LogisticGaussian(LogisticGaussianSpec),
    ClassGaussian(ClassGaussianSpec),
}

pub fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// A Gaussian law with its Cholesky factor.
#[derive(Debug, Clone)]
struct Gaussian {
    mean: Vec<f64>,
    cov: Vec<f64>,
    chol: Vec<f64>,
    log_norm: f64,
}

impl Gaussian {
    fn new(mean: &[f64], covariance: &[Vec<f64>], what: &str) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(invalid(format!("{what}: mean is empty")));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("{what}: mean has a non-finite entry")));
        }
        if covariance.len() != d || covariance.iter().any(|r| r.len() != d) {
            return Err(invalid(format!("{what}: covariance must be {d}x{d}")));
        }
        let cov: Vec<f64> = covariance.iter().flatten().copied().collect();
        let chol = cholesky(&cov, d).map_err(|e| invalid(format!("{what}: {e}")))?;
        let log_det: f64 = (0..d).map(|i| 2.0 * chol[i * d + i].ln()).sum();
        let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self { mean: mean.to_vec(), cov, chol, log_norm })
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        // Forward substitution L z = x - mean.
        let mut z = vec![0.0; d];
        let mut q = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for j in 0..i {
                s -= self.chol[i * d + j] * z[j];
            }
            z[i] = s / self.chol[i * d + i];
            q += z[i] * z[i];
        }
        self.log_norm - 0.5 * q
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut Vec<f64>) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            let mut s = self.mean[i];
            for j in 0..=i {
                s += self.chol[i * d + j] * z[j];
            }
            out.push(s);
        }
    }

    /// `Some(sigma^2)` when the covariance is `sigma^2 I`.
    fn isotropic_variance(&self) -> Option<f64> {
        let d = self.dim();
        let s = self.cov[0];
        for i in 0..d {
            for j in 0..d {
                let v = self.cov[i * d + j];
                if (i == j && v != s) || (i != j && v != 0.0) {
                    return None;
                }
            }
        }
        Some(s)
    }
}

#[derive(Debug, Clone)]
enum Family {
    Logistic { x: Gaussian, weights: Vec<f64>, intercept: f64 },
    Classes { log_priors: Vec<f64>, priors: Vec<f64>, classes: Vec<Gaussian> },
}

/// A validated model, ready for sampling and oracle evaluation.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    family: Family,
}

impl TryFrom<ModelSpec> for Model {
    type Error = Error;
    fn try_from(spec: ModelSpec) -> Result<Self> {
        Model::new(spec)
    }
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let family = match &spec {
            ModelSpec::LogisticGaussian(s) => {
                let x = Gaussian::new(&s.mean, &s.covariance, "feature law")?;
                if s.weights.len() != x.dim() {
                    return Err(invalid(format!("{} weights for dimension {}", s.weights.len(), x.dim())));
                }
                if s.weights.iter().any(|v| !v.is_finite()) || !s.intercept.is_finite() {
                    return Err(invalid("weights and intercept must be finite"));
                }
                Family::Logistic { x, weights: s.weights.clone(), intercept: s.intercept }
            }
            ModelSpec::ClassGaussian(s) => {
                if s.priors.len() < 2 {
                    return Err(invalid("class-Gaussian model needs at least 2 classes"));
                }
                if s.priors.len() != s.classes.len() {
                    return Err(invalid(format!("{} priors but {} classes", s.priors.len(), s.classes.len())));
                }
                if s.priors.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
                    return Err(invalid("class priors must be strictly positive"));
                }
                let total: f64 = s.priors.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("class priors sum to {total}, not 1")));
                }
                let classes = s
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(y, c)| Gaussian::new(&c.mean, &c.covariance, &format!("class {y}")))
                    .collect::<Result<Vec<_>>>()?;
                let d = classes[0].dim();
                if classes.iter().any(|c| c.dim() != d) {
                    return Err(invalid("class means differ in dimension"));
                }
                Family::Classes {
                    log_priors: s.priors.iter().map(|p| p.ln()).collect(),
                    priors: s.priors.clone(),
                    classes,
                }
            }
        };
        Ok(Self { spec, family })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            Family::Logistic { x, .. } => x.dim(),
            Family::Classes { classes, .. } => classes[0].dim(),
        }
    }

    pub fn num_labels(&self) -> usize {
        match &self.family {
            Family::Logistic { .. } => 2,
            Family::Classes { priors, .. } => priors.len(),
        }
    }

    /// Printable label names: `"1"`, `"2"` for the logistic family, class
    /// indices otherwise.
    pub fn label_names(&self) -> Vec<String> {
        match &self.family {
            Family::Logistic { .. } => vec!["1".into(), "2".into()],
            Family::Classes { priors, .. } => (0..priors.len()).map(|y| y.to_string()).collect(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!("point has dimension {}, model has {}", x.len(), self.dim())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("point has a non-finite coordinate"));
        }
        Ok(())
    }

    fn check_label(&self, y: u32) -> Result<()> {
        if y as usize >= self.num_labels() {
            return Err(invalid(format!("label id {y} outside alphabet of size {}", self.num_labels())));
        }
        Ok(())
    }

    fn logit(&self, x: &[f64]) -> Option<f64> {
        match &self.family {
            Family::Logistic { weights, intercept, .. } => {
                Some(weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + intercept)
            }
            Family::Classes { .. } => None,
        }
    }

    /// Whether `P(Y | X = x)` is the same for every `x`.
    fn has_constant_posterior(&self) -> bool {
        matches!(&self.family, Family::Logistic { weights, .. } if weights.iter().all(|&w| w == 0.0))
    }

    /// `P(Y = y | X = x)` for every label id.
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        match &self.family {
            Family::Logistic { .. } => {
                let t = self.logit(x).expect("logistic");
                vec![sigmoid(t), sigmoid(-t)]
            }
            Family::Classes { log_priors, classes, .. } => {
                let logs: Vec<f64> = log_priors.iter().zip(classes).map(|(lp, g)| lp + g.log_pdf(x)).collect();
                let norm = log_sum_exp(&logs);
                logs.iter().map(|l| (l - norm).exp()).collect()
            }
        }
    }

    /// Density of the feature law at `x`.
    pub fn feature_density(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::Logistic { x: g, .. } => g.log_pdf(x).exp(),
            Family::Classes { log_priors, classes, .. } => {
                let logs: Vec<f64> = log_priors.iter().zip(classes).map(|(lp, g)| lp + g.log_pdf(x)).collect();
                log_sum_exp(&logs).exp()
            }
        }
    }

    /// Appends one draw of `(X, Y)`.
    pub fn draw(&self, rng: &mut StreamRng, coords: &mut Vec<f64>, labels: &mut Vec<u32>) {
        match &self.family {
            Family::Logistic { x, .. } => {
                let start = coords.len();
                x.draw(rng, coords);
                let t = self.logit(&coords[start..]).expect("logistic");
                let u: f64 = rng.random();
                labels.push(if u < sigmoid(t) { 0 } else { 1 });
            }
            Family::Classes { priors, classes, .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut y = priors.len() - 1;
                for (j, p) in priors.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        y = j;
                        break;
                    }
                }
                classes[y].draw(rng, coords);
                labels.push(y as u32);
            }
        }
    }

    /// Draws `n` i.i.d. pairs from a caller-supplied stream.
    pub fn sample_with(&self, n: usize, rng: &mut StreamRng) -> Result<Dataset> {
        let mut coords = Vec::with_capacity(n * self.dim());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            self.draw(rng, &mut coords, &mut labels);
        }
        Dataset::new(PointSet::new(coords, self.dim())?, labels, self.num_labels())?
            .with_label_names(self.label_names())
    }
}

/// `n` i.i.d. draws, reproducible from `(model, n, seed)`.
pub fn sample(model: &Model, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(invalid(format!("sample size {n} below 2")));
    }
    let mut rng = substream(seed, Purpose::Dataset, &[n as u64]);
    model.sample_with(n, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Exact,
    Quadrature,
    MonteCarlo,
}

/// Reference value of `H(Y|X)` for a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub value: f64,
    pub method: OracleMethod,
    /// Absolute error estimate (quadrature) or standard error (Monte Carlo).
    pub error_bound: f64,
    pub evaluations: usize,
}

/// Ground-truth conditional entropy in nats.
pub fn true_conditional_entropy(model: &Model, tolerance: f64) -> Result<GroundTruth> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    match &model.family {
        Family::Logistic { x, weights, intercept } => {
            let d = x.dim();
            let mu = weights.iter().zip(&x.mean).map(|(w, a)| w * a).sum::<f64>() + intercept;
            let mut var = 0.0;
            for i in 0..d {
                for j in 0..d {
                    var += weights[i] * x.cov[i * d + j] * weights[j];
                }
            }
            if var <= 0.0 {
                return Ok(GroundTruth {
                    value: logit_binary_entropy(mu),
                    method: OracleMethod::Exact,
                    error_bound: f64::EPSILON,
                    evaluations: 1,
                });
            }
            let s = var.sqrt();
            let integral = integrate(
                |z| std_normal_pdf(z) * logit_binary_entropy(mu + s * z),
                -QUADRATURE_HALF_WIDTH,
                QUADRATURE_HALF_WIDTH,
                tolerance,
            )?;
            // Mass outside the window, times the largest possible integrand.
            let tail = 2.0 * std_normal_cdf(-QUADRATURE_HALF_WIDTH) * std::f64::consts::LN_2;
            Ok(GroundTruth {
                value: integral.value.clamp(0.0, std::f64::consts::LN_2),
                method: OracleMethod::Quadrature,
                error_bound: (integral.error + tail).max(f64::MIN_POSITIVE),
                evaluations: integral.evaluations,
            })
        }
        Family::Classes { priors, .. } => {
            const CHUNKS: usize = 64;
            const MIN_SAMPLES: usize = 100_000;
            const MAX_SAMPLES: usize = 4_000_000;
            // Per-draw spread is at most log(m) / 2.
            let sd_bound = (priors.len() as f64).ln() / 2.0;
            let wanted = ((sd_bound / tolerance).powi(2)).ceil();
            let total =
                if wanted.is_finite() { (wanted as usize).clamp(MIN_SAMPLES, MAX_SAMPLES) } else { MAX_SAMPLES };
            let per_chunk = total.div_ceil(CHUNKS);
            let sums = map_range(CHUNKS, |c| {
                let mut rng = substream(ORACLE_SEED, Purpose::GroundTruth, &[c as u64]);
                let mut coords = Vec::with_capacity(model.dim());
                let mut labels = Vec::with_capacity(1);
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..per_chunk {
                    coords.clear();
                    labels.clear();
                    model.draw(&mut rng, &mut coords, &mut labels);
                    let h = entropy_of(&model.posterior(&coords));
                    s1 += h;
                    s2 += h * h;
                }
                (s1, s2)
            });
            let n = (per_chunk * CHUNKS) as f64;
            let mean = pairwise_sum(&sums.iter().map(|s| s.0).collect::<Vec<_>>()) / n;
            let second = pairwise_sum(&sums.iter().map(|s| s.1).collect::<Vec<_>>()) / n;
            let se = ((second - mean * mean).max(0.0) / (n - 1.0)).sqrt();
            Ok(GroundTruth {
                value: mean.clamp(0.0, (priors.len() as f64).ln()),
                method: OracleMethod::MonteCarlo,
                error_bound: se.max(f64::MIN_POSITIVE),
                evaluations: per_chunk * CHUNKS,
            })
        }
    }
}

/// A probability with its accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub value: f64,
    pub error_bound: f64,
    pub method: OracleMethod,
}

fn check_geometry(model: &Model, x: &[f64], y: u32, t: f64, tolerance: f64) -> Result<()> {
    model.check_point(x)?;
    model.check_label(y)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("radius must be positive and finite, got {t}")));
    }
    if !(tolerance > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    Ok(())
}

fn monte_carlo_draws(tolerance: f64) -> usize {
    let wanted = (0.25 / (tolerance * tolerance)).ceil();
    if wanted.is_finite() {
        (wanted as usize).clamp(10_000, 10_000_000)
    } else {
        10_000_000
    }
}

fn bits_tag(x: &[f64], y: u32, t: f64) -> Vec<u64> {
    let mut tags: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
    tags.push(y as u64);
    tags.push(t.to_bits());
    tags
}

/// Weighted ratio `sum(w f) / sum(w)` with a delta-method standard error.
fn ratio_estimate(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let num = pairwise_sum(&pairs.iter().map(|p| p.0 * p.1).collect::<Vec<_>>()) / n;
    let den = pairwise_sum(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()) / n;
    let r = num / den;
    let var = pairs.iter().map(|&(w, f)| (w * (f - r)).powi(2)).sum::<f64>() / (n - 1.0);
    (r, (var / n).sqrt() / den)
}

fn random_direction(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// `P(Y = y | X in B(x, t))` for the closed ball of radius `t`.
///
/// Quadrature in one dimension, importance-weighted Monte Carlo (uniform
/// draws in the ball, weighted by the feature density) otherwise.
pub fn ball_label_probability(model: &Model, x: &[f64], y: u32, t: f64, tolerance: f64) -> Result<Probability> {
    check_geometry(model, x, y, t, tolerance)?;
    if model.has_constant_posterior() {
        return Ok(Probability {
            value: model.posterior(x)[y as usize],
            error_bound: f64::EPSILON,
            method: OracleMethod::Exact,
        });
    }
    let d = model.dim();
    if d == 1 {
        let (lo, hi) = (x[0] - t, x[0] + t);
        let scale = [lo, x[0], hi].iter().map(|&u| model.feature_density(&[u])).fold(0.0, f64::max);
        if scale <= 0.0 {
            return Err(Error::Numeric("feature density underflows on the ball".into()));
        }
        let tol = tolerance * 1e-2 * 2.0 * t;
        let den = integrate(|u| model.feature_density(&[u]) / scale, lo, hi, tol)?;
        let num = integrate(|u| model.feature_density(&[u]) / scale * model.posterior(&[u])[y as usize], lo, hi, tol)?;
        let value = (num.value / den.value).clamp(0.0, 1.0);
        return Ok(Probability {
            value,
            error_bound: ((num.error + value * den.error) / den.value).max(f64::EPSILON),
            method: OracleMethod::Quadrature,
        });
    }
    let draws = monte_carlo_draws(tolerance);
    let mut rng = substream(ORACLE_SEED, Purpose::BallProbability, &bits_tag(x, y, t));
    let mut pairs = Vec::with_capacity(draws);
    let mut u = vec![0.0; d];
    for _ in 0..draws {
        let dir = random_direction(&mut rng, d);
        let r = t * rng.random::<f64>().powf(1.0 / d as f64);
        for j in 0..d {
            u[j] = x[j] + r * dir[j];
        }
        pairs.push((model.feature_density(&u), model.posterior(&u)[y as usize]));
    }
    let (value, se) = ratio_estimate(&pairs);
    Ok(Probability {
        value: value.clamp(0.0, 1.0),
        error_bound: se.max(f64::EPSILON),
        method: OracleMethod::MonteCarlo,
    })
}

/// `P(Y = y | ||X - x|| = t)`, the complement of the mixture weight
/// `alpha(x, y, t)` of the conditional law of the same-label count.
///
/// In one dimension this is the two-point average of the posterior at
/// `x - t` and `x + t` weighted by the feature density; in higher dimensions
/// it is a density-weighted Monte Carlo average over the sphere.
pub fn sphere_label_probability(model: &Model, x: &[f64], y: u32, t: f64, tolerance: f64) -> Result<Probability> {
    check_geometry(model, x, y, t, tolerance)?;
    if model.has_constant_posterior() {
        return Ok(Probability {
            value: model.posterior(x)[y as usize],
            error_bound: f64::EPSILON,
            method: OracleMethod::Exact,
        });
    }
    let d = model.dim();
    if d == 1 {
        let (a, b) = ([x[0] - t], [x[0] + t]);
        let (fa, fb) = (model.feature_density(&a), model.feature_density(&b));
        if fa + fb <= 0.0 {
            return Err(Error::Numeric("feature density underflows on the sphere".into()));
        }
        let value = (fa * model.posterior(&a)[y as usize] + fb * model.posterior(&b)[y as usize]) / (fa + fb);
        return Ok(Probability { value, error_bound: 4.0 * f64::EPSILON, method: OracleMethod::Exact });
    }
    let draws = monte_carlo_draws(tolerance);
    let mut rng = substream(ORACLE_SEED, Purpose::SphereProbability, &bits_tag(x, y, t));
    let mut pairs = Vec::with_capacity(draws);
    let mut u = vec![0.0; d];
    for _ in 0..draws {
        let dir = random_direction(&mut rng, d);
        for j in 0..d {
            u[j] = x[j] + t * dir[j];
        }
        pairs.push((model.feature_density(&u), model.posterior(&u)[y as usize]));
    }
    let (value, se) = ratio_estimate(&pairs);
    Ok(Probability {
        value: value.clamp(0.0, 1.0),
        error_bound: se.max(f64::EPSILON),
        method: OracleMethod::MonteCarlo,
    })
}

/// Law of the distance `||X - x||` from a fixed point when every Gaussian
/// component of the feature law is isotropic: a mixture of scaled
/// noncentral chi laws.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceLaw {
    dim: usize,
    /// `(weight, sigma, noncentrality)` with noncentrality `||a - x||^2 / sigma^2`.
    components: Vec<(f64, f64, f64)>,
}

impl DistanceLaw {
    pub fn new(model: &Model, x: &[f64]) -> Result<Self> {
        model.check_point(x)?;
        let parts: Vec<(f64, &Gaussian)> = match &model.family {
            Family::Logistic { x: g, .. } => vec![(1.0, g)],
            Family::Classes { priors, classes, .. } => priors.iter().copied().zip(classes).collect(),
        };
        let mut components = Vec::with_capacity(parts.len());
        for (w, g) in parts {
            let var = g
                .isotropic_variance()
                .ok_or_else(|| invalid("distance law requires isotropic covariance (sigma^2 I)"))?;
            let lambda = g.mean.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / var;
            components.push((w, var.sqrt(), lambda));
        }
        Ok(Self { dim: model.dim(), components })
    }

    /// `P(||X - x|| <= u)`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u.is_infinite() {
            return 1.0;
        }
        let v: f64 = self
            .components
            .iter()
            .map(|&(w, sigma, lambda)| w * noncentral_chi2_cdf((u / sigma).powi(2), self.dim as f64, lambda))
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// Density of `||X - x||` at `u`.
    pub fn density(&self, u: f64) -> f64 {
        if u < 0.0 || !u.is_finite() {
            return 0.0;
        }
        self.components
            .iter()
            .map(|&(w, sigma, lambda)| {
                w * poisson_mix(lambda, |j| chi_density(u, self.dim as f64 + 2.0 * j as f64, sigma))
            })
            .sum()
    }
}

/// `sum_j Pois(j; lambda/2) g(j)`.
fn poisson_mix(lambda: f64, g: impl Fn(usize) -> f64) -> f64 {
    if lambda == 0.0 {
        return g(0);
    }
    let half = lambda / 2.0;
    let last = (half + 12.0 * half.sqrt() + 30.0).ceil() as usize;
    (0..=last).map(|j| (-half + j as f64 * half.ln() - ln_gamma(j as f64 + 1.0)).exp() * g(j)).sum()
}

fn noncentral_chi2_cdf(s: f64, dof: f64, lambda: f64) -> f64 {
    poisson_mix(lambda, |j| gamma_lr(dof / 2.0 + j as f64, s / 2.0))
}

/// Density of `sigma * sqrt(chi^2_nu)`.
fn chi_density(u: f64, nu: f64, sigma: f64) -> f64 {
    let power = if nu == 1.0 {
        0.0
    } else if u == 0.0 {
        return 0.0;
    } else {
        (nu - 1.0) * u.ln()
    };
    (std::f64::consts::LN_2 + power
        - nu * sigma.ln()
        - (u * u) / (2.0 * sigma * sigma)
        - (nu / 2.0) * std::f64::consts::LN_2
        - ln_gamma(nu / 2.0))
    .exp()
}
