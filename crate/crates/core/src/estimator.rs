//! Nearest-neighbor estimator of the conditional entropy `H(Y|X)` for
//! continuous features and discrete labels, together with plug-in label
//! entropy, mutual information and a difference-of-entropies baseline built
//! from Kozachenko-Leonenko differential entropy estimates.
//!
//! For each sample point `i` with `k`-th neighbor radius `rho_i`, let
//! `xi_i` be the number of other points in the closed ball of radius `rho_i`
//! that carry the same label as `i`. The estimate is
//!
//! ```text
//! H_hat = (1/n) * sum_i [ log k - log(xi_i + 1) ]
//! ```
//!
//! in nats. Every term lies in `[log(k/(k+1)), log k]`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{invalid, Result};
use crate::numeric::pairwise_sum;
use crate::par::map_range;
use crate::spatial::{PointSet, SpatialIndex, DEFAULT_LEAF_CAPACITY};

/// Radius floor used by [`kl_differential_entropy`] for coincident points.
pub const RADIUS_FLOOR: f64 = 1e-12;

/// Feature vectors paired with label ids drawn from `0..num_labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: PointSet,
    labels: Vec<u32>,
    num_labels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_names: Option<Vec<String>>,
}

impl Dataset {
    /// A dataset over a declared alphabet of `num_labels` ids. Ids in the
    /// alphabet need not all occur.
    pub fn new(features: PointSet, labels: Vec<u32>, num_labels: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(invalid(format!("{} feature rows but {} labels", features.len(), labels.len())));
        }
        if num_labels == 0 {
            return Err(invalid("label alphabet is empty"));
        }
        if let Some(pos) = labels.iter().position(|&y| y as usize >= num_labels) {
            return Err(invalid(format!(
                "label id {} at row {pos} outside alphabet of size {num_labels}",
                labels[pos]
            )));
        }
        Ok(Self { features, labels, num_labels, label_names: None })
    }

    /// A dataset whose alphabet is read off the labels: ids must cover
    /// `0..=max` without gaps.
    pub fn from_labels(features: PointSet, labels: Vec<u32>) -> Result<Self> {
        let m = labels.iter().copied().max().map_or(0, |v| v as usize + 1);
        let mut seen = vec![false; m];
        for &y in &labels {
            seen[y as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("label id {missing} never occurs")));
        }
        Self::new(features, labels, m)
    }

    pub fn with_label_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_labels {
            return Err(invalid(format!("{} label names for an alphabet of size {}", names.len(), self.num_labels)));
        }
        self.label_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> &PointSet {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn label_names(&self) -> Option<&[String]> {
        self.label_names.as_deref()
    }

    /// Display name of label id `y`.
    pub fn label_name(&self, y: u32) -> String {
        match &self.label_names {
            Some(names) => names[y as usize].clone(),
            None => y.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    /// Occurrence count of every id in the alphabet.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_labels];
        for &y in &self.labels {
            counts[y as usize] += 1;
        }
        counts
    }

    /// The dataset restricted to feature column `j`.
    pub fn project(&self, j: usize) -> Result<Dataset> {
        Ok(Dataset {
            features: self.features.column(j)?,
            labels: self.labels.clone(),
            num_labels: self.num_labels,
            label_names: self.label_names.clone(),
        })
    }

    /// Rows `ids`, in the given order, over the same alphabet.
    pub fn subset(&self, ids: &[usize]) -> Result<Dataset> {
        Ok(Dataset {
            features: self.features.subset(ids)?,
            labels: ids.iter().map(|&i| self.labels[i]).collect(),
            num_labels: self.num_labels,
            label_names: self.label_names.clone(),
        })
    }
}

/// How the neighbor count `k` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KRule {
    /// A fixed neighbor count.
    Fixed(usize),
    /// `k = round(c * n^alpha)`, clamped to `1..=n-1`.
    Schedule { alpha: f64, c: f64 },
}

impl Default for KRule {
    fn default() -> Self {
        KRule::Schedule { alpha: 0.5, c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub k: KRule,
    /// Report `max(0, estimate)` instead of the raw value.
    pub clamp_nonnegative: bool,
    /// Cap the same-label count at `k` when ties enlarge the ball.
    pub tie_clamp: bool,
    pub leaf_capacity: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { k: KRule::default(), clamp_nonnegative: false, tie_clamp: true, leaf_capacity: DEFAULT_LEAF_CAPACITY }
    }
}

impl EstimatorConfig {
    pub fn fixed(k: usize) -> Self {
        Self { k: KRule::Fixed(k), ..Self::default() }
    }

    pub fn schedule(alpha: f64, c: f64) -> Self {
        Self { k: KRule::Schedule { alpha, c }, ..Self::default() }
    }
}

/// Point estimate with per-point terms and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    /// Reported estimate in nats; equals `raw_value` unless clamping applied.
    pub value: f64,
    /// Mean of `per_point_terms`.
    pub raw_value: f64,
    pub per_point_terms: Vec<f64>,
    pub k_used: usize,
    /// Points whose closed ball held more than `k` other points.
    pub tie_events: usize,
    pub negative_flag: bool,
    /// Whether `clamp_nonnegative` changed the reported value.
    pub clamped: bool,
}

/// Resolves the neighbor count for a sample of size `n`.
pub fn resolve_k(n: usize, config: &EstimatorConfig) -> Result<usize> {
    if n < 2 {
        return Err(invalid(format!("sample size {n} below 2")));
    }
    match config.k {
        KRule::Fixed(k) => {
            if k == 0 || k >= n {
                return Err(invalid(format!("k = {k} outside 1..={} for n = {n}", n - 1)));
            }
            Ok(k)
        }
        KRule::Schedule { alpha, c } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid(format!("schedule exponent {alpha} outside (0, 1)")));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid(format!("schedule constant {c} must be positive")));
            }
            let k = (c * (n as f64).powf(alpha)).round();
            Ok((k.max(1.0) as usize).min(n - 1))
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BallCount {
    same_label: usize,
    ball_size: usize,
}

/// Same-label count and total population of the closed `k`-NN ball of `i`.
fn ball_count(labels: &[u32], index: &SpatialIndex<'_>, i: usize, k: usize) -> Result<BallCount> {
    let n = labels.len();
    let probe = if k + 1 < n { k + 1 } else { k };
    let nn = index.knn(i, probe)?;
    let rho = nn[k - 1].distance;
    let yi = labels[i];
    if nn.len() > k && nn[k].distance <= rho {
        let ball = index.neighbors_within(i, rho)?;
        let same = ball.iter().filter(|&&j| labels[j] == yi).count();
        return Ok(BallCount { same_label: same, ball_size: ball.len() });
    }
    let same = nn[..k].iter().filter(|nb| labels[nb.id] == yi).count();
    Ok(BallCount { same_label: same, ball_size: k })
}

/// Number of other points in the closed `k`-NN ball of point `i` sharing
/// its label, capped at `k` when `tie_clamp` is set.
pub fn xi_statistic(dataset: &Dataset, index: &SpatialIndex<'_>, i: usize, k: usize, tie_clamp: bool) -> Result<usize> {
    check_index(dataset, index)?;
    let c = ball_count(dataset.labels(), index, i, k)?;
    Ok(if tie_clamp { c.same_label.min(k) } else { c.same_label })
}

fn check_index(dataset: &Dataset, index: &SpatialIndex<'_>) -> Result<()> {
    if index.points().len() != dataset.len() || index.points().dim() != dataset.dim() {
        return Err(invalid("index was not built over this dataset's features"));
    }
    Ok(())
}

/// Conditional entropy estimate `H(Y|X)` in nats.
pub fn conditional_entropy(dataset: &Dataset, config: &EstimatorConfig) -> Result<EstimateResult> {
    let index = SpatialIndex::build(dataset.features(), config.leaf_capacity)?;
    conditional_entropy_with_index(dataset, &index, config)
}

/// As [`conditional_entropy`], reusing a prebuilt index.
pub fn conditional_entropy_with_index(
    dataset: &Dataset,
    index: &SpatialIndex<'_>,
    config: &EstimatorConfig,
) -> Result<EstimateResult> {
    check_index(dataset, index)?;
    let n = dataset.len();
    let k = resolve_k(n, config)?;
    let labels = dataset.labels();
    let counts = map_range(n, |i| ball_count(labels, index, i, k));
    let log_k = (k as f64).ln();
    let mut terms = Vec::with_capacity(n);
    let mut tie_events = 0;
    for c in counts {
        let c = c?;
        if c.ball_size > k {
            tie_events += 1;
        }
        let xi = if config.tie_clamp { c.same_label.min(k) } else { c.same_label };
        terms.push(-((xi + 1) as f64).ln() + log_k);
    }
    let raw = pairwise_sum(&terms) / n as f64;
    let negative = raw < 0.0;
    let clamped = config.clamp_nonnegative && negative;
    Ok(EstimateResult {
        value: if clamped { 0.0 } else { raw },
        raw_value: raw,
        per_point_terms: terms,
        k_used: k,
        tie_events,
        negative_flag: negative,
        clamped,
    })
}

/// Plug-in (empirical frequency) entropy of a label vector, in nats.
pub fn label_entropy(labels: &[u32]) -> Result<f64> {
    if labels.is_empty() {
        return Err(invalid("label vector is empty"));
    }
    let m = labels.iter().copied().max().expect("nonempty") as usize + 1;
    let mut counts = vec![0usize; m];
    for &y in labels {
        counts[y as usize] += 1;
    }
    let n = labels.len() as f64;
    let terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `I(X, Y) = H(Y) - H(Y|X)`, reported raw (may be negative).
pub fn mutual_information(dataset: &Dataset, config: &EstimatorConfig) -> Result<f64> {
    let raw = EstimatorConfig { clamp_nonnegative: false, ..*config };
    Ok(label_entropy(dataset.labels())? - conditional_entropy(dataset, &raw)?.value)
}

/// Kozachenko-Leonenko differential entropy estimate with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferentialEntropy {
    pub value: f64,
    /// Points whose `k`-NN radius was zero and got floored.
    pub floor_events: usize,
}

/// Log volume of the unit ball in `R^d`.
pub fn log_unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)
}

/// `psi(n) - psi(k) + log V_d + (d/n) sum_i log rho_i`.
pub fn kl_differential_entropy(points: &PointSet, k: usize) -> Result<DifferentialEntropy> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(invalid(format!("k = {k} outside 1..={} for n = {n}", n - 1)));
    }
    let index = SpatialIndex::with_default_capacity(points)?;
    let radii = map_range(n, |i| index.kth_neighbor_distance(i, k));
    let mut logs = Vec::with_capacity(n);
    let mut floor_events = 0;
    for r in radii {
        let r = r?;
        if r < RADIUS_FLOOR {
            floor_events += 1;
        }
        logs.push(r.max(RADIUS_FLOOR).ln());
    }
    let d = points.dim() as f64;
    let value =
        digamma(n as f64) - digamma(k as f64) + log_unit_ball_volume(points.dim()) + d * pairwise_sum(&logs) / n as f64;
    Ok(DifferentialEntropy { value, floor_events })
}

/// Difference-of-entropies estimate
/// `H(Y) - H(X) + sum_y p(y) H(X | Y = y)` with Kozachenko-Leonenko terms.
pub fn baseline_conditional_entropy(dataset: &Dataset, k: usize) -> Result<f64> {
    let counts = dataset.label_counts();
    for (y, &c) in counts.iter().enumerate() {
        if c > 0 && c <= k {
            return Err(invalid(format!(
                "class '{}' has {c} points, needs more than k = {k}",
                dataset.label_name(y as u32)
            )));
        }
    }
    let n = dataset.len() as f64;
    let h_y = label_entropy(dataset.labels())?;
    let h_x = kl_differential_entropy(dataset.features(), k)?.value;
    let mut class_terms = Vec::new();
    for (y, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let ids: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels()[i] as usize == y).collect();
        let h = kl_differential_entropy(&dataset.features().subset(&ids)?, k)?.value;
        class_terms.push(c as f64 / n * h);
    }
    Ok(h_y - h_x + pairwise_sum(&class_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hand_dataset() -> Dataset {
        Dataset::from_labels(PointSet::new(vec![0.0, 1.0, 2.5, 10.0], 1).unwrap(), vec![0, 1, 0, 1]).unwrap()
    }

    #[test]
    fn resolve_k_examples() {
        assert_eq!(resolve_k(100, &EstimatorConfig::schedule(0.5, 1.0)).unwrap(), 10);
        assert_eq!(resolve_k(2, &EstimatorConfig::schedule(0.9, 1.0)).unwrap(), 1);
        assert_eq!(resolve_k(8000, &EstimatorConfig::schedule(0.5, 1.0)).unwrap(), 89);
        assert_eq!(resolve_k(4000, &EstimatorConfig::schedule(0.5, 1.0)).unwrap(), 63);
        assert_eq!(resolve_k(10, &EstimatorConfig::fixed(9)).unwrap(), 9);
        assert!(resolve_k(10, &EstimatorConfig::fixed(10)).is_err());
        assert!(resolve_k(10, &EstimatorConfig::fixed(0)).is_err());
        assert!(resolve_k(1, &EstimatorConfig::default()).is_err());
        assert!(resolve_k(10, &EstimatorConfig::schedule(1.0, 1.0)).is_err());
        assert!(resolve_k(10, &EstimatorConfig::schedule(0.5, 0.0)).is_err());
    }

    #[test]
    fn xi_hand_example() {
        let ds = hand_dataset();
        let idx = SpatialIndex::with_default_capacity(ds.features()).unwrap();
        assert_eq!(xi_statistic(&ds, &idx, 0, 2, true).unwrap(), 1);
    }

    #[test]
    fn xi_extremes() {
        let p = PointSet::new(vec![0.0, 1.0, 3.0, 7.0, 15.0], 1).unwrap();
        let same = Dataset::from_labels(p.clone(), vec![0; 5]).unwrap();
        let distinct = Dataset::from_labels(p.clone(), vec![0, 1, 2, 3, 4]).unwrap();
        let idx = SpatialIndex::with_default_capacity(&p).unwrap();
        for i in 0..5 {
            assert_eq!(xi_statistic(&same, &idx, i, 3, true).unwrap(), 3);
            assert_eq!(xi_statistic(&distinct, &idx, i, 3, true).unwrap(), 0);
        }
    }

    #[test]
    fn hand_estimate() {
        let r = conditional_entropy(&hand_dataset(), &EstimatorConfig::fixed(2)).unwrap();
        assert_eq!(r.per_point_terms, vec![0.0, 2f64.ln(), 0.0, 0.0]);
        assert_eq!(r.value, 2f64.ln() / 4.0);
        assert!((r.value - 0.173287).abs() < 1e-6);
        assert_eq!(r.tie_events, 0);
        assert!(!r.negative_flag);
    }

    #[test]
    fn constant_labels_give_log_k_over_k_plus_one() {
        let p = PointSet::new((0..16).map(|i| (i * i) as f64 * 0.37).collect(), 1).unwrap();
        let ds = Dataset::from_labels(p, vec![0; 16]).unwrap();
        let r = conditional_entropy(&ds, &EstimatorConfig::fixed(3)).unwrap();
        assert!((r.value - (0.75f64).ln()).abs() < 1e-15);
        assert!((r.value + 0.287682).abs() < 1e-6);
        for k in 1..=5usize {
            let v = conditional_entropy(&ds, &EstimatorConfig::fixed(k)).unwrap().value;
            assert_eq!(v, (k as f64).ln() - ((k + 1) as f64).ln());
        }
        assert!(r.negative_flag);
        assert!(!r.clamped);
        let c = conditional_entropy(&ds, &EstimatorConfig { clamp_nonnegative: true, ..EstimatorConfig::fixed(3) })
            .unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.raw_value, r.raw_value);
        assert!(c.clamped);
    }

    #[test]
    fn ties_are_counted_and_clamped() {
        // Point 0 has neighbors 1, 2, 3 all at distance 1.
        let p = PointSet::new(vec![0.0, 1.0, -1.0, 1.0, 9.0], 1).unwrap();
        let ds = Dataset::from_labels(p, vec![0, 0, 0, 0, 1]).unwrap();
        let idx = SpatialIndex::with_default_capacity(ds.features()).unwrap();
        assert_eq!(xi_statistic(&ds, &idx, 0, 2, false).unwrap(), 3);
        assert_eq!(xi_statistic(&ds, &idx, 0, 2, true).unwrap(), 2);
        let r = conditional_entropy(&ds, &EstimatorConfig::fixed(2)).unwrap();
        assert!(r.tie_events >= 1);
        let lo = (2f64 / 3.0).ln() - 1e-15;
        assert!(r.per_point_terms.iter().all(|&t| t >= lo));
    }

    #[test]
    fn label_entropy_examples() {
        assert_eq!(label_entropy(&[2, 2, 2]).unwrap(), 0.0);
        assert!((label_entropy(&[0, 1, 1, 0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        let v = label_entropy(&[0, 0, 0, 1]).unwrap();
        assert!((v - 0.562335).abs() < 1e-6);
        assert!(label_entropy(&[]).is_err());
    }

    #[test]
    fn mutual_information_constant_labels() {
        let p = PointSet::new((0..8).map(|i| i as f64 * 1.3 + (i % 3) as f64 * 0.1).collect(), 1).unwrap();
        let ds = Dataset::from_labels(p, vec![0; 8]).unwrap();
        let mi = mutual_information(&ds, &EstimatorConfig::fixed(3)).unwrap();
        assert!((mi - (4f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn kl_translation_invariance_exact() {
        // Dyadic coordinates shifted by integers translate without rounding.
        let coords: Vec<f64> =
            (0..300).map(|i| ((i * 7919) % 1024) as f64 / 1024.0 + (i % 5) as f64 / 4096.0).collect();
        let p = PointSet::new(coords.clone(), 3).unwrap();
        let q =
            PointSet::new(coords.iter().enumerate().map(|(j, c)| c + [3.0, -2.0, 5.0][j % 3]).collect(), 3).unwrap();
        assert_eq!(kl_differential_entropy(&p, 4).unwrap(), kl_differential_entropy(&q, 4).unwrap());
    }

    #[test]
    fn kl_floor_on_duplicates() {
        let p = PointSet::new(vec![1.0, 1.0, 1.0, 2.0, 3.0], 1).unwrap();
        let r = kl_differential_entropy(&p, 1).unwrap();
        assert_eq!(r.floor_events, 3);
        assert!(r.value.is_finite());
        assert!(kl_differential_entropy(&p, 5).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((log_unit_ball_volume(1) - 2f64.ln()).abs() < 1e-14);
        assert!((log_unit_ball_volume(2) - std::f64::consts::PI.ln()).abs() < 1e-14);
        assert!((log_unit_ball_volume(3) - (4.0 / 3.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn baseline_single_class_is_zero() {
        let p = PointSet::new((0..40).map(|i| (i as f64 * 0.731).sin()).collect(), 2).unwrap();
        let ds = Dataset::from_labels(p, vec![0; 20]).unwrap();
        assert_eq!(baseline_conditional_entropy(&ds, 3).unwrap(), 0.0);
    }

    #[test]
    fn baseline_rejects_small_class() {
        let p = PointSet::new((0..10).map(|i| i as f64).collect(), 1).unwrap();
        let ds = Dataset::from_labels(p, vec![0, 0, 0, 0, 0, 0, 0, 1, 1, 1])
            .unwrap()
            .with_label_names(vec!["big".into(), "tiny".into()])
            .unwrap();
        let err = baseline_conditional_entropy(&ds, 3).unwrap_err();
        assert!(err.to_string().contains("tiny"), "{err}");
        assert!(baseline_conditional_entropy(&ds, 2).is_ok());
    }

    #[test]
    fn dataset_validation() {
        let p = PointSet::new(vec![0.0, 1.0, 2.0], 1).unwrap();
        assert!(Dataset::new(p.clone(), vec![0, 1], 2).is_err());
        assert!(Dataset::new(p.clone(), vec![0, 1, 2], 2).is_err());
        assert!(Dataset::from_labels(p.clone(), vec![0, 2, 2]).is_err());
        let ds = Dataset::from_labels(p, vec![0, 0, 0]).unwrap();
        assert_eq!(ds.num_labels(), 1);
    }

    fn arb_dataset() -> impl Strategy<Value = (Dataset, usize)> {
        (3usize..70, 1usize..4, 1u32..5).prop_flat_map(|(n, d, m)| {
            (prop::collection::vec(-100i32..100, n * d), prop::collection::vec(0..m, n), 1..n).prop_map(
                move |(c, labels, k)| {
                    let p = PointSet::new(c.into_iter().map(|v| v as f64 / 8.0).collect(), d).unwrap();
                    (Dataset::new(p, labels, m as usize).unwrap(), k)
                },
            )
        })
    }

    proptest! {
        #[test]
        fn per_point_terms_in_range((ds, k) in arb_dataset()) {
            let r = conditional_entropy(&ds, &EstimatorConfig::fixed(k)).unwrap();
            let lo = (k as f64).ln() - ((k + 1) as f64).ln();
            let hi = (k as f64).ln();
            for &t in &r.per_point_terms {
                prop_assert!(t >= lo && t <= hi);
            }
            prop_assert!(r.value >= lo - 1e-12 && r.value <= hi + 1e-12);
            prop_assert_eq!(r.value, pairwise_sum(&r.per_point_terms) / ds.len() as f64);
        }

        #[test]
        fn relabeling_and_scaling_invariance((ds, k) in arb_dataset(), shift in 1u32..4, scale_exp in -3i32..4) {
            let cfg = EstimatorConfig::fixed(k);
            let base = conditional_entropy(&ds, &cfg).unwrap();
            let m = ds.num_labels() as u32;
            let relabeled = Dataset::new(
                ds.features().clone(),
                ds.labels().iter().map(|&y| (y + shift) % m).collect(),
                m as usize,
            ).unwrap();
            prop_assert_eq!(conditional_entropy(&relabeled, &cfg).unwrap().value, base.value);
            // Power-of-two scaling is exact, so the comparison is exact too.
            let s = 2f64.powi(scale_exp);
            let scaled = Dataset::new(
                PointSet::new(ds.features().as_slice().iter().map(|v| v * s).collect(), ds.dim()).unwrap(),
                ds.labels().to_vec(),
                m as usize,
            ).unwrap();
            prop_assert_eq!(conditional_entropy(&scaled, &cfg).unwrap().per_point_terms, base.per_point_terms);
        }
    }
}
