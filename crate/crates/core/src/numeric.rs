//! Small numerical kernels shared across modules.

use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Error, Result};

/// Pairwise (cascade) summation in slice order.
///
/// The reduction tree depends only on the slice length, so the result is
/// bit-reproducible for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs {
        [] => 0.0,
        [x] => *x,
        _ => {
            let (a, b) = xs.split_at(xs.len() / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Logistic function, evaluated without overflow for large |t|.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(t))`.
#[inline]
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Binary entropy (nats) of the Bernoulli law with success probability
/// `sigmoid(t)`.
#[inline]
pub fn logit_binary_entropy(t: f64) -> f64 {
    // -s log s - (1-s) log(1-s) with log s = -softplus(-t), log(1-s) = -softplus(t)
    sigmoid(t) * softplus(-t) + sigmoid(-t) * softplus(t)
}

/// Plug-in entropy (nats) of a probability vector, with `0 log 0 = 0`.
pub fn entropy_of(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `x^e` with the convention `0^0 = 1`.
#[inline]
fn pow0(x: f64, e: u64) -> f64 {
    if e == 0 {
        1.0
    } else {
        x.powi(e as i32)
    }
}

/// `C(m, j) p^j (1-p)^(m-j)`; zero outside `0 <= j <= m`.
pub fn binomial_pmf(m: u64, j: i64, p: f64) -> f64 {
    if j < 0 || j as u64 > m {
        return 0.0;
    }
    let j = j as u64;
    binomial_term(m, j, p, j, m - j)
}

/// `C(m, j) p^a (1-p)^b`, evaluated in log space when both factors are
/// nondegenerate. Used by the order-statistic and mixture formulas.
pub(crate) fn binomial_term(m: u64, j: u64, p: f64, a: u64, b: u64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return (ln_binomial(m, j)).exp() * pow0(p, a) * pow0(1.0 - p, b);
    }
    (ln_binomial(m, j) + a as f64 * p.ln() + b as f64 * (-p).ln_1p()).exp()
}

/// `P(Bin(m, p) >= k)`, summing whichever tail avoids cancellation.
pub fn binomial_upper_tail(m: u64, k: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > m {
        return 0.0;
    }
    if (k as f64) >= m as f64 * p {
        pairwise_sum(&(k..=m).map(|j| binomial_pmf(m, j as i64, p)).collect::<Vec<_>>())
    } else {
        let lower = pairwise_sum(&(0..k).map(|j| binomial_pmf(m, j as i64, p)).collect::<Vec<_>>());
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

/// Lower Cholesky factor of a symmetric positive-definite `d x d` matrix
/// stored row-major.
pub fn cholesky(matrix: &[f64], d: usize) -> Result<Vec<f64>> {
    if matrix.len() != d * d {
        return Err(invalid(format!("covariance has {} entries, expected {}", matrix.len(), d * d)));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(invalid("covariance has a non-finite entry"));
    }
    for i in 0..d {
        for j in 0..i {
            let (a, b) = (matrix[i * d + j], matrix[j * d + i]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(invalid(format!("covariance is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = matrix[i * d + j];
            for p in 0..j {
                s -= l[i * d + p] * l[j * d + p];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(invalid("covariance is not positive definite"));
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature on `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `tolerance` (absolute).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tolerance: f64) -> Result<Integral> {
    const MAX_INTERVALS: usize = 4000;
    if !(tolerance > 0.0) {
        return Err(invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (v, e) = gauss_kronrod(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= tolerance {
            break;
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "quadrature did not reach tolerance {tolerance:e} (error {total_err:e})"
            )));
        }
        let worst =
            intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = intervals.iter().map(|iv| iv.2).collect();
    Ok(Integral { value: pairwise_sum(&values), error: intervals.iter().map(|iv| iv.3).sum(), evaluations })
}
