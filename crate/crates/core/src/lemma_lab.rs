//! Exact finite-sample laws of the nearest-neighbor statistics at a fixed
//! point, and Monte Carlo checks of them.
//!
//! Fix a point `x`, a label `y` and `n - 1` i.i.d. pairs `(X_j, Y_j)`. Let
//! `rho` be the distance from `x` to its `k`-th nearest `X_j` and `xi` the
//! number of `j` with `Y_j = y` and `||X_j - x|| <= rho`. Then
//!
//! * conditionally on `rho = t`, `xi` is the two-component binomial mixture
//!   returned by [`conditional_xi_law`], with `p = P(Y = y | X in B(x, t))`
//!   and `alpha = P(Y != y | ||X - x|| = t)`;
//! * `P(rho <= t) = P(Bin(n - 1, p_x(t)) >= k)` with `p_x(t) = P(||X - x|| <= t)`,
//!   and `rho` has the density [`knn_distance_density`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{ball_label_probability, sphere_label_probability, DistanceLaw, Model, Probability};
use crate::numeric::{binomial_pmf, binomial_term, binomial_upper_tail, integrate, pairwise_sum};
use crate::par::map_range;
use crate::rng::{substream, Purpose};

/// Default total-variation acceptance threshold.
pub const DEFAULT_TV_THRESHOLD: f64 = 0.05;
/// Fewest shell hits a law check accepts as conclusive.
pub const DEFAULT_MIN_HITS: usize = 500;
/// Asymptotic 95% Kolmogorov-Smirnov coefficient.
pub const KS_95: f64 = 1.36;

/// Law of `xi` given `rho = t` over `r = 0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixturePmf {
    pub k: usize,
    pub p: f64,
    pub alpha: f64,
    pub pmf: Vec<f64>,
}

/// `pmf(r) = C(k-1, r) p^r (1-p)^(k-1-r) alpha + C(k-1, r-1) p^(r-1) (1-p)^(k-r) (1 - alpha)`,
/// binomial coefficients outside their range being zero.
pub fn conditional_xi_law(k: usize, p: f64, alpha: f64) -> Result<MixturePmf> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("p = {p} and alpha = {alpha} must lie in [0, 1]")));
    }
    let m = (k - 1) as u64;
    let pmf =
        (0..=k as i64).map(|r| binomial_pmf(m, r, p) * alpha + binomial_pmf(m, r - 1, p) * (1.0 - alpha)).collect();
    Ok(MixturePmf { k, p, alpha, pmf })
}

/// Half the l1 distance between two pmfs on the same support.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "pmfs must share a support");
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Parameters of a shell-conditioned check of [`conditional_xi_law`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawCheck {
    pub x: Vec<f64>,
    pub y: u32,
    pub n: usize,
    pub k: usize,
    /// Shell center.
    pub t: f64,
    /// Shell half-width; replicates with `rho` in `(t - delta, t + delta]` are kept.
    pub delta: f64,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_min_hits")]
    pub min_hits: usize,
    /// Accuracy requested from the `p` and `alpha` oracles.
    #[serde(default = "default_oracle_tolerance")]
    pub oracle_tolerance: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_TV_THRESHOLD
}
fn default_min_hits() -> usize {
    DEFAULT_MIN_HITS
}
fn default_oracle_tolerance() -> f64 {
    1e-4
}

impl LawCheck {
    pub fn new(x: Vec<f64>, y: u32, n: usize, k: usize, t: f64, delta: f64, replicates: usize, seed: u64) -> Self {
        Self {
            x,
            y,
            n,
            k,
            t,
            delta,
            replicates,
            seed,
            threshold: DEFAULT_TV_THRESHOLD,
            min_hits: DEFAULT_MIN_HITS,
            oracle_tolerance: default_oracle_tolerance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub t: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawCheckReport {
    pub empirical_pmf: Vec<f64>,
    pub analytic_pmf: Vec<f64>,
    pub counts: Vec<usize>,
    pub tv_distance: f64,
    /// Replicates that fell inside the shell.
    pub replicates_used: usize,
    pub replicates_simulated: usize,
    pub shell: Shell,
    pub ball_probability: Probability,
    pub sphere_probability: Probability,
    pub threshold: f64,
    pub acceptance: bool,
}

fn check_sizes(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("n = {n} below 2")));
    }
    if k < 1 || k >= n {
        return Err(invalid(format!("k = {k} outside 1..={}", n - 1)));
    }
    Ok(())
}

/// `(rho, xi)` for one replicate of `n - 1` pairs around `x`.
fn simulate_statistics(
    model: &Model,
    x: &[f64],
    y: u32,
    n: usize,
    k: usize,
    rng: &mut crate::rng::StreamRng,
) -> (f64, usize) {
    let d = model.dim();
    let mut coords = Vec::with_capacity((n - 1) * d);
    let mut labels = Vec::with_capacity(n - 1);
    for _ in 1..n {
        model.draw(rng, &mut coords, &mut labels);
    }
    let dist: Vec<f64> =
        coords.chunks_exact(d).map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()).collect();
    let mut scratch = dist.clone();
    let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    let rho = *kth;
    let xi = dist.iter().zip(&labels).filter(|&(&r, &l)| r <= rho && l == y).count();
    (rho, xi)
}

/// Median of the simulated `k`-th neighbor distance from `x`.
pub fn median_knn_radius(model: &Model, x: &[f64], n: usize, k: usize, pilot: usize, seed: u64) -> Result<f64> {
    check_sizes(n, k)?;
    if pilot == 0 {
        return Err(invalid("pilot sample size must be positive"));
    }
    let mut radii = map_range(pilot, |r| {
        let mut rng = substream(seed, Purpose::LemmaPilot, &[n as u64, k as u64, r as u64]);
        simulate_statistics(model, x, 0, n, k, &mut rng).0
    });
    radii.sort_by(f64::total_cmp);
    Ok(radii[pilot / 2])
}

/// Simulates `replicates` samples around `x`, keeps those whose `k`-th
/// neighbor distance falls in the shell `(t - delta, t + delta]`, and
/// compares the law of the same-label count with [`conditional_xi_law`].
pub fn verify_conditional_law(model: &Model, check: &LawCheck) -> Result<LawCheckReport> {
    check_sizes(check.n, check.k)?;
    if !(check.delta > 0.0 && check.delta < check.t) {
        return Err(invalid(format!("shell needs 0 < delta < t, got t = {}, delta = {}", check.t, check.delta)));
    }
    if check.replicates == 0 {
        return Err(invalid("replicates must be positive"));
    }
    let ball = ball_label_probability(model, &check.x, check.y, check.t, check.oracle_tolerance)?;
    let sphere = sphere_label_probability(model, &check.x, check.y, check.t, check.oracle_tolerance)?;
    let (n, k) = (check.n, check.k);
    let (lo, hi) = (check.t - check.delta, check.t + check.delta);
    let outcomes = map_range(check.replicates, |r| {
        let mut rng = substream(check.seed, Purpose::LemmaShell, &[n as u64, k as u64, r as u64]);
        let (rho, xi) = simulate_statistics(model, &check.x, check.y, n, k, &mut rng);
        (rho > lo && rho <= hi).then_some(xi.min(k))
    });
    let mut counts = vec![0usize; k + 1];
    for xi in outcomes.into_iter().flatten() {
        counts[xi] += 1;
    }
    let hits: usize = counts.iter().sum();
    if hits < check.min_hits {
        return Err(Error::Inconclusive { hits, required: check.min_hits });
    }
    let analytic = conditional_xi_law(k, ball.value, 1.0 - sphere.value)?;
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / hits as f64).collect();
    let tv = tv_distance(&empirical, &analytic.pmf);
    Ok(LawCheckReport {
        empirical_pmf: empirical,
        analytic_pmf: analytic.pmf,
        counts,
        tv_distance: tv,
        replicates_used: hits,
        replicates_simulated: check.replicates,
        shell: Shell { t: check.t, delta: check.delta },
        ball_probability: ball,
        sphere_probability: sphere,
        threshold: check.threshold,
        acceptance: tv <= check.threshold,
    })
}

/// `P(rho <= t)` given `p = p_x(t)`: the upper binomial tail
/// `sum_{j=k}^{n-1} C(n-1, j) p^j (1-p)^(n-1-j)`.
pub fn knn_distance_cdf(p: f64, n: usize, k: usize) -> Result<f64> {
    check_sizes(n, k)?;
    Ok(binomial_upper_tail((n - 1) as u64, k as u64, p.clamp(0.0, 1.0)))
}

/// Density of the `k`-th neighbor distance among `n - 1` points at radius
/// `u`, given the distance CDF `p_of_u` and density `f_of_u` of `||X - x||`:
///
/// ```text
/// h(u) = sum_{j=k}^{n-1} C(n-1, j) [ j p^(j-1) (1-p)^(n-1-j) - (n-1-j) p^j (1-p)^(n-j-2) ] f(u)
/// ```
///
/// The bracketed terms summed over all `j = 0..=n-1` vanish, so the tail
/// `j >= k` equals minus the head `j < k`. The head is used when
/// `k < (n-1) p`: both sums then consist of terms of one sign, and no
/// cancellation occurs.
pub fn knn_distance_density(
    p_of_u: impl Fn(f64) -> f64,
    f_of_u: impl Fn(f64) -> f64,
    n: usize,
    k: usize,
    u: f64,
) -> Result<f64> {
    check_sizes(n, k)?;
    if !(u >= 0.0) {
        return Err(invalid(format!("radius must be nonnegative, got {u}")));
    }
    let p = p_of_u(u).clamp(0.0, 1.0);
    let m = (n - 1) as u64;
    let term = |j: u64| {
        let first = if j == 0 { 0.0 } else { j as f64 * binomial_term(m, j, p, j - 1, m - j) };
        let second = if j == m { 0.0 } else { (m - j) as f64 * binomial_term(m, j, p, j, m - j - 1) };
        first - second
    };
    let k = k as u64;
    let sum = if k as f64 >= m as f64 * p {
        pairwise_sum(&(k..=m).map(term).collect::<Vec<_>>())
    } else {
        -pairwise_sum(&(0..k).map(term).collect::<Vec<_>>())
    };
    Ok(sum * f_of_u(u))
}

/// Closed-form `k`-th order statistic density
/// `k C(n-1, k) p^(k-1) (1-p)^(n-1-k) f`.
pub fn order_statistic_density(p: f64, f: f64, n: usize, k: usize) -> Result<f64> {
    check_sizes(n, k)?;
    let m = (n - 1) as u64;
    let k = k as u64;
    Ok(k as f64 * binomial_term(m, k, p.clamp(0.0, 1.0), k - 1, m - k) * f)
}

/// Kolmogorov-Smirnov comparison of simulated `k`-th neighbor distances
/// with their exact CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    /// `1.36 / sqrt(samples)`.
    pub band: f64,
    pub samples: usize,
    pub within_band: bool,
}

/// One-sample KS statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Simulates `samples` draws of the `k`-th neighbor distance from `x` among
/// `n - 1` model points and reports the KS statistic against the exact CDF.
pub fn verify_distance_distribution(
    model: &Model,
    x: &[f64],
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<KsReport> {
    check_sizes(n, k)?;
    if samples == 0 {
        return Err(invalid("samples must be positive"));
    }
    let law = DistanceLaw::new(model, x)?;
    let mut radii = map_range(samples, |r| {
        let mut rng = substream(seed, Purpose::DistanceCheck, &[n as u64, k as u64, r as u64]);
        simulate_statistics(model, x, 0, n, k, &mut rng).0
    });
    let m = (n - 1) as u64;
    let statistic = ks_statistic(&mut radii, |t| binomial_upper_tail(m, k as u64, law.cdf(t)));
    let band = KS_95 / (samples as f64).sqrt();
    Ok(KsReport { statistic, band, samples, within_band: statistic <= band })
}

/// Agreement between [`knn_distance_density`], its closed form, and the CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub k: usize,
    /// `integral_0^inf h(u) du`.
    pub normalization: f64,
    pub normalization_error: f64,
    /// Largest relative gap between the sum and the closed form on a grid.
    pub max_relative_gap: f64,
    pub ks: KsReport,
}

/// Normalization, closed-form agreement and KS check for one `(n, k)`.
pub fn density_check(model: &Model, x: &[f64], n: usize, k: usize, samples: usize, seed: u64) -> Result<DensityReport> {
    check_sizes(n, k)?;
    let law = DistanceLaw::new(model, x)?;
    let mut upper = 1.0;
    while law.cdf(upper) < 1.0 - 1e-16 && upper < 1e6 {
        upper *= 2.0;
    }
    let h = |u: f64| knn_distance_density(|v| law.cdf(v), |v| law.density(v), n, k, u).unwrap_or(f64::NAN);
    let integral = integrate(h, 0.0, upper, 1e-10)?;
    let mut max_gap: f64 = 0.0;
    for i in 1..=200 {
        let u = upper * i as f64 / 200.0;
        let closed = order_statistic_density(law.cdf(u), law.density(u), n, k)?;
        if closed > 1e-300 {
            max_gap = max_gap.max((h(u) - closed).abs() / closed);
        }
    }
    Ok(DensityReport {
        n,
        k,
        normalization: integral.value,
        normalization_error: integral.error,
        max_relative_gap: max_gap,
        ks: verify_distance_distribution(model, x, n, k, samples, seed)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LogisticGaussianSpec, ModelSpec};

    fn logistic_1d(w: f64, b: f64) -> Model {
        Model::new(ModelSpec::LogisticGaussian(LogisticGaussianSpec::standard(vec![w], b))).unwrap()
    }

    #[test]
    fn k_one_collapses_to_alpha() {
        let law = conditional_xi_law(1, 0.3, 0.8).unwrap();
        assert_eq!(law.pmf.len(), 2);
        assert!((law.pmf[0] - 0.8).abs() < 1e-15);
        assert!((law.pmf[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn hand_mixture() {
        let law = conditional_xi_law(2, 0.5, 0.5).unwrap();
        for (got, want) in law.pmf.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(conditional_xi_law(0, 0.5, 0.5).is_err());
        assert!(conditional_xi_law(2, 1.5, 0.5).is_err());
    }

    #[test]
    fn normalization_grid() {
        for k in 1..=6 {
            for i in 0..10 {
                for j in 0..10 {
                    let (p, a) = (i as f64 / 9.0, j as f64 / 9.0);
                    let s: f64 = conditional_xi_law(k, p, a).unwrap().pmf.iter().sum();
                    assert!((s - 1.0).abs() < 1e-12, "k={k} p={p} a={a}");
                }
            }
        }
    }

    #[test]
    fn degenerate_mixtures() {
        for k in 1..=6usize {
            for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let plain = conditional_xi_law(k, p, 1.0).unwrap();
                let shifted = conditional_xi_law(k, p, 0.0).unwrap();
                for r in 0..=k {
                    let b = binomial_pmf((k - 1) as u64, r as i64, p);
                    let bs = binomial_pmf((k - 1) as u64, r as i64 - 1, p);
                    assert!((plain.pmf[r] - b).abs() < 1e-15);
                    assert!((shifted.pmf[r] - bs).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn self_comparison_has_zero_tv() {
        let law = conditional_xi_law(4, 0.3, 0.6).unwrap();
        assert_eq!(tv_distance(&law.pmf, &law.pmf), 0.0);
    }

    #[test]
    fn single_neighbor_density_is_distance_density() {
        for u in [0.0, 0.3, 1.7] {
            let h = knn_distance_density(|v| (v / 3.0).min(1.0), |_| 1.0 / 3.0, 2, 1, u).unwrap();
            assert!((h - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(knn_distance_density(|_| 0.5, |_| 1.0, 5, 5, 1.0).is_err());
        assert!(knn_distance_density(|_| 0.5, |_| 1.0, 5, 0, 1.0).is_err());
    }

    #[test]
    fn cdf_limits() {
        assert_eq!(knn_distance_cdf(1.0, 50, 5).unwrap(), 1.0);
        assert_eq!(knn_distance_cdf(0.0, 50, 5).unwrap(), 0.0);
        let law = DistanceLaw::new(&logistic_1d(1.0, 0.0), &[0.0]).unwrap();
        assert_eq!(knn_distance_cdf(law.cdf(f64::INFINITY), 50, 5).unwrap(), 1.0);
    }

    #[test]
    fn density_normalizes_for_gaussian() {
        let m = logistic_1d(1.0, 0.0);
        let law = DistanceLaw::new(&m, &[0.0]).unwrap();
        let i = integrate(
            |u| knn_distance_density(|v| law.cdf(v), |v| law.density(v), 50, 5, u).unwrap(),
            0.0,
            12.0,
            1e-12,
        )
        .unwrap();
        assert!((i.value - 1.0).abs() < 1e-6, "{}", i.value);
    }

    #[test]
    fn law_check_rejects_bad_shells() {
        let m = logistic_1d(0.0, 0.0);
        let bad = LawCheck::new(vec![0.0], 0, 200, 1, 0.1, 0.2, 100, 1);
        assert!(verify_conditional_law(&m, &bad).is_err());
        let too_few = LawCheck::new(vec![0.0], 0, 200, 1, 0.01, 0.001, 50, 1);
        match verify_conditional_law(&m, &too_few) {
            Err(Error::Inconclusive { hits, required }) => {
                assert!(hits < required);
                assert_eq!(required, DEFAULT_MIN_HITS);
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }

    #[test]
    fn law_check_is_deterministic() {
        let m = logistic_1d(2.0, 0.0);
        let t = median_knn_radius(&m, &[0.3], 40, 2, 501, 3).unwrap();
        let mut c = LawCheck::new(vec![0.3], 0, 40, 2, t, t / 5.0, 3000, 8);
        c.min_hits = 100;
        let a = verify_conditional_law(&m, &c).unwrap();
        let b = verify_conditional_law(&m, &c).unwrap();
        assert_eq!(a, b);
        assert!((a.empirical_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
