//! Split scoring: binned Hellinger, Gaussian Hellinger, information gain,
//! and the Hoeffding bound used to decide when a split is safe.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{ClassHistogram, GaussianStat};
use crate::tree::LeafStats;
use crate::types::ClassLabel;

/// Floor applied to a single zero standard deviation before evaluating the
/// Gaussian Hellinger distance.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// Which split criterion a tree uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Information gain over binned class counts (plain VFDT).
    InfoGain,
    /// Hellinger distance over binned class counts (HD-VFDT).
    HellingerBinned,
    /// Closed-form Hellinger distance between per-class normals (GH-VFDT).
    HellingerGaussian,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [
        Criterion::InfoGain,
        Criterion::HellingerBinned,
        Criterion::HellingerGaussian,
    ];

    /// Range R of the criterion, as needed by the Hoeffding bound.
    pub fn range(self) -> f64 {
        match self {
            Criterion::HellingerBinned => SQRT_2,
            Criterion::HellingerGaussian | Criterion::InfoGain => 1.0,
        }
    }

    /// Whether leaves must keep per-feature class histograms.
    pub fn uses_histograms(self) -> bool {
        !matches!(self, Criterion::HellingerGaussian)
    }

    /// Short algorithm name used in configs and reports.
    pub fn algorithm_name(self) -> &'static str {
        match self {
            Criterion::InfoGain => "vfdt",
            Criterion::HellingerBinned => "hd-vfdt",
            Criterion::HellingerGaussian => "gh-vfdt",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.algorithm_name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vfdt" | "info-gain" | "infogain" | "htree" => Ok(Criterion::InfoGain),
            "hd-vfdt" | "hellinger-binned" => Ok(Criterion::HellingerBinned),
            "gh-vfdt" | "hellinger-gaussian" => Ok(Criterion::HellingerGaussian),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// A scored candidate split on one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub feature_index: usize,
    pub threshold: f64,
    pub score: f64,
}

/// Parameters of the Hoeffding test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingParams {
    pub delta: f64,
    pub tau: f64,
    pub range: f64,
}

impl HoeffdingParams {
    pub fn new(delta: f64, tau: f64, range: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0,1), got {delta}"
            )));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::Config(format!("tau must be >= 0, got {tau}")));
        }
        if !range.is_finite() || range <= 0.0 {
            return Err(Error::Config(format!("range must be > 0, got {range}")));
        }
        Ok(Self { delta, tau, range })
    }

    pub fn for_criterion(criterion: Criterion, delta: f64, tau: f64) -> Result<Self> {
        Self::new(delta, tau, criterion.range())
    }
}

/// Hoeffding bound: `sqrt(R^2 ln(1/delta) / (2n))`.
pub fn hoeffding_epsilon(params: &HoeffdingParams, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("hoeffding bound needs n >= 1"));
    }
    let r2 = params.range * params.range;
    Ok((r2 * (1.0 / params.delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Hellinger distance between the normalized class frequencies of a histogram.
pub fn hellinger_binned(h: &ClassHistogram) -> Result<f64> {
    hellinger_counts(
        h.counts(ClassLabel::Positive),
        h.counts(ClassLabel::Negative),
    )
}

/// Binned Hellinger distance over raw per-bin counts. Result lies in `[0, sqrt(2)]`.
pub fn hellinger_counts(pos: &[u64], neg: &[u64]) -> Result<f64> {
    debug_assert_eq!(pos.len(), neg.len());
    let total_pos: u64 = pos.iter().sum();
    let total_neg: u64 = neg.iter().sum();
    if total_pos == 0 {
        return Err(Error::UndefinedDistance("no positive instances"));
    }
    if total_neg == 0 {
        return Err(Error::UndefinedDistance("no negative instances"));
    }
    let (tp, tn) = (total_pos as f64, total_neg as f64);
    // Bins holding only one class contribute their normalized mass as-is; summing
    // those counts as integers first keeps disjoint supports at exactly sqrt(2).
    let mut only_pos = 0u64;
    let mut only_neg = 0u64;
    let mut shared = 0.0;
    for (&p, &n) in pos.iter().zip(neg) {
        match (p, n) {
            (0, 0) => {}
            (p, 0) => only_pos += p,
            (0, n) => only_neg += n,
            (p, n) => {
                let d = (p as f64 / tp).sqrt() - (n as f64 / tn).sqrt();
                shared += d * d;
            }
        }
    }
    let sum = only_pos as f64 / tp + only_neg as f64 / tn + shared;
    Ok(sum.sqrt().min(SQRT_2))
}

/// Closed-form Hellinger distance between two normal distributions.
///
/// Degenerate spreads: two point masses are 0 apart when they coincide and 1
/// otherwise; a single zero sigma is floored at [`SIGMA_FLOOR`].
pub fn hellinger_normal(mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> f64 {
    if sigma1 == 0.0 && sigma2 == 0.0 {
        return if mu1 == mu2 { 0.0 } else { 1.0 };
    }
    let s1 = if sigma1 == 0.0 { SIGMA_FLOOR } else { sigma1 };
    let s2 = if sigma2 == 0.0 { SIGMA_FLOOR } else { sigma2 };
    let var_sum = s1 * s1 + s2 * s2;
    let diff = mu1 - mu2;
    let affinity = (2.0 * s1 * s2 / var_sum).sqrt() * (-0.25 * diff * diff / var_sum).exp();
    (1.0 - affinity).max(0.0).sqrt().min(1.0)
}

/// Gaussian Hellinger distance between two per-class feature summaries.
/// Each side needs at least two observations.
pub fn hellinger_gaussian(pos: &GaussianStat, neg: &GaussianStat) -> Result<f64> {
    if pos.count() < 2 || neg.count() < 2 {
        return Err(Error::InsufficientData(format!(
            "gaussian hellinger needs >= 2 observations per class (have {} and {})",
            pos.count(),
            neg.count()
        )));
    }
    Ok(hellinger_normal(
        pos.mean(),
        pos.std_dev(),
        neg.mean(),
        neg.std_dev(),
    ))
}

fn binary_entropy(pos: u64, neg: u64) -> f64 {
    let n = (pos + neg) as f64;
    if pos == 0 || neg == 0 {
        return 0.0;
    }
    let p = pos as f64 / n;
    let q = neg as f64 / n;
    -(p * p.log2() + q * q.log2())
}

/// Information gain of the two-way split placing bins `< threshold_bin` left.
/// `threshold_bin` is an interior edge index in `1..bins`.
pub fn info_gain(h: &ClassHistogram, threshold_bin: usize) -> Result<f64> {
    if threshold_bin == 0 || threshold_bin >= h.bins() {
        return Err(Error::invalid(format!(
            "threshold bin {threshold_bin} is not an interior edge of {} bins",
            h.bins()
        )));
    }
    let pos = h.counts(ClassLabel::Positive);
    let neg = h.counts(ClassLabel::Negative);
    let left_pos: u64 = pos[..threshold_bin].iter().sum();
    let left_neg: u64 = neg[..threshold_bin].iter().sum();
    let total_pos: u64 = pos.iter().sum();
    let total_neg: u64 = neg.iter().sum();
    Ok(info_gain_counts(
        [left_pos, left_neg],
        [total_pos - left_pos, total_neg - left_neg],
    ))
}

/// Gain of a binary partition given `[pos, neg]` counts on each side.
fn info_gain_counts(left: [u64; 2], right: [u64; 2]) -> f64 {
    let n_left = left[0] + left[1];
    let n_right = right[0] + right[1];
    let n = n_left + n_right;
    if n == 0 {
        return 0.0;
    }
    let parent = binary_entropy(left[0] + right[0], left[1] + right[1]);
    let children = (n_left as f64 * binary_entropy(left[0], left[1])
        + n_right as f64 * binary_entropy(right[0], right[1]))
        / n as f64;
    (parent - children).clamp(0.0, 1.0)
}

/// Best cut of a binned feature: every interior edge is tried and the lowest
/// threshold wins among equal scores.
fn best_binned_cut(h: &ClassHistogram, criterion: Criterion) -> Result<(f64, f64)> {
    let pos = h.counts(ClassLabel::Positive);
    let neg = h.counts(ClassLabel::Negative);
    let total_pos: u64 = pos.iter().sum();
    let total_neg: u64 = neg.iter().sum();
    let mut best: Option<(f64, f64)> = None;
    let (mut left_pos, mut left_neg) = (0u64, 0u64);
    for t in 1..h.bins() {
        left_pos += pos[t - 1];
        left_neg += neg[t - 1];
        let right = [total_pos - left_pos, total_neg - left_neg];
        let score = match criterion {
            Criterion::InfoGain => info_gain_counts([left_pos, left_neg], right),
            _ => hellinger_counts(&[left_pos, right[0]], &[left_neg, right[1]])?,
        };
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, h.edges()[t]));
        }
    }
    // bins >= 2, so there is at least one interior edge
    Ok(best.expect("histogram has an interior edge"))
}

/// Scores one feature of a leaf under `criterion`. `Ok(None)` means the
/// feature cannot be scored yet.
pub fn score_feature(
    leaf: &LeafStats,
    feature: usize,
    criterion: Criterion,
) -> Result<Option<SplitScore>> {
    match criterion {
        Criterion::HellingerGaussian => {
            let pos = leaf.gaussian(feature, ClassLabel::Positive);
            let neg = leaf.gaussian(feature, ClassLabel::Negative);
            match hellinger_gaussian(pos, neg) {
                Ok(score) => Ok(Some(SplitScore {
                    feature_index: feature,
                    threshold: 0.5 * (pos.mean() + neg.mean()),
                    score,
                })),
                Err(Error::InsufficientData(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
        Criterion::HellingerBinned | Criterion::InfoGain => {
            let Some(h) = leaf.histogram(feature) else {
                return Ok(None);
            };
            if h.total(ClassLabel::Positive) == 0 || h.total(ClassLabel::Negative) == 0 {
                return Ok(None);
            }
            let (score, threshold) = best_binned_cut(h, criterion)?;
            Ok(Some(SplitScore {
                feature_index: feature,
                threshold,
                score,
            }))
        }
    }
}

/// The two highest-scoring features of a leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopSplits {
    pub best: SplitScore,
    pub runner_up: Option<SplitScore>,
}

impl TopSplits {
    /// Score of the runner-up, or 0 when only one feature was scoreable.
    pub fn runner_up_score(&self) -> f64 {
        self.runner_up.map_or(0.0, |s| s.score)
    }

    pub fn gap(&self) -> f64 {
        self.best.score - self.runner_up_score()
    }
}

/// Finds the best and second-best features of a leaf. Ties go to the lowest
/// feature index. Returns `Ok(None)` when no feature can be scored.
pub fn best_two_features(leaf: &LeafStats, criterion: Criterion) -> Result<Option<TopSplits>> {
    if leaf.class_count(ClassLabel::Positive) == 0 || leaf.class_count(ClassLabel::Negative) == 0 {
        return Err(Error::UndefinedDistance("leaf has seen a single class"));
    }
    let mut best: Option<SplitScore> = None;
    let mut runner_up: Option<SplitScore> = None;
    for feature in 0..leaf.n_features() {
        let Some(candidate) = score_feature(leaf, feature, criterion)? else {
            continue;
        };
        // strict comparisons keep the earlier (lower-index) feature on ties
        if best.is_none_or(|b| candidate.score > b.score) {
            runner_up = best;
            best = Some(candidate);
        } else if runner_up.is_none_or(|r| candidate.score > r.score) {
            runner_up = Some(candidate);
        }
    }
    Ok(best.map(|best| TopSplits { best, runner_up }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(pos: Vec<u64>, neg: Vec<u64>) -> ClassHistogram {
        let edges = (0..=pos.len()).map(|j| j as f64).collect();
        ClassHistogram::from_counts(edges, pos, neg).unwrap()
    }

    #[test]
    fn binned_identical_is_zero() {
        assert_eq!(
            hellinger_binned(&hist(vec![10, 10], vec![10, 10])).unwrap(),
            0.0
        );
    }

    #[test]
    fn binned_disjoint_is_sqrt2() {
        assert_eq!(
            hellinger_binned(&hist(vec![20, 0], vec![0, 20])).unwrap(),
            SQRT_2
        );
        assert_eq!(
            hellinger_binned(&hist(vec![1, 2, 0, 0], vec![0, 0, 3, 7])).unwrap(),
            SQRT_2
        );
    }

    #[test]
    fn binned_hand_value() {
        // mpmath, 40 digits: 0.26105238444010318309...
        let d = hellinger_binned(&hist(vec![10, 10], vec![5, 15])).unwrap();
        assert!((d - 0.261_052_384_440_103_2).abs() < 1e-15, "{d}");
    }

    #[test]
    fn binned_needs_both_classes() {
        let err = hellinger_binned(&hist(vec![0, 0], vec![3, 1])).unwrap_err();
        assert!(matches!(err, Error::UndefinedDistance(_)));
        assert!(hellinger_binned(&hist(vec![1, 0], vec![0, 0])).is_err());
    }

    #[test]
    fn gaussian_examples() {
        // mpmath + quadrature: 0.34278724803499414..., 0.32491969623290628...
        assert_eq!(hellinger_normal(2.5, 1.7, 2.5, 1.7), 0.0);
        assert!((hellinger_normal(0.0, 1.0, 1.0, 1.0) - 0.342_787_248_034_994_1).abs() < 1e-15);
        assert!((hellinger_normal(0.0, 1.0, 0.0, 2.0) - 0.324_919_696_232_906_3).abs() < 1e-15);
        assert_eq!(hellinger_normal(0.0, 0.0, 1.0, 0.0), 1.0);
        assert_eq!(hellinger_normal(3.0, 0.0, 3.0, 0.0), 0.0);
    }

    #[test]
    fn gaussian_single_zero_sigma_is_floored() {
        let d = hellinger_normal(0.0, 0.0, 0.0, 1.0);
        let expected = hellinger_normal(0.0, SIGMA_FLOOR, 0.0, 1.0);
        assert_eq!(d, expected);
        assert!(d > 0.99 && d <= 1.0);
    }

    #[test]
    fn gaussian_needs_two_observations() {
        let mut a = GaussianStat::new();
        let mut b = GaussianStat::new();
        for x in [1.0, 2.0, 3.0] {
            a.update(x).unwrap();
        }
        b.update(5.0).unwrap();
        assert!(matches!(
            hellinger_gaussian(&a, &b),
            Err(Error::InsufficientData(_))
        ));
        b.update(6.0).unwrap();
        assert!(hellinger_gaussian(&a, &b).is_ok());
    }

    #[test]
    fn info_gain_examples() {
        // perfect separation of a balanced parent
        assert_eq!(info_gain(&hist(vec![8, 0], vec![0, 8]), 1).unwrap(), 1.0);
        // children with the parent's ratio
        assert!(info_gain(&hist(vec![2, 6], vec![1, 3]), 1).unwrap().abs() < 1e-15);
        // parent 8+/8-, left 6+/2-, right 2+/6-: 1 - H(0.75) = 0.18872187554086714
        let g = info_gain(&hist(vec![6, 2], vec![2, 6]), 1).unwrap();
        assert!((g - 0.188_721_875_540_867_14).abs() < 1e-14, "{g}");
    }

    #[test]
    fn info_gain_empty_child_and_bad_bin() {
        let h = hist(vec![3, 0, 0], vec![4, 0, 0]);
        assert_eq!(info_gain(&h, 2).unwrap(), 0.0);
        assert!(info_gain(&h, 0).is_err());
        assert!(info_gain(&h, 3).is_err());
    }

    #[test]
    fn epsilon_values() {
        let p = HoeffdingParams::new(0.01, 0.0, 1.0).unwrap();
        let e1000 = hoeffding_epsilon(&p, 1000).unwrap();
        assert!((e1000 - 0.047_985_259_121_880_81).abs() < 1e-15);
        assert_eq!(hoeffding_epsilon(&p, 4000).unwrap(), e1000 / 2.0);
        let p2 = HoeffdingParams::new(0.01, 0.0, SQRT_2).unwrap();
        let e2 = hoeffding_epsilon(&p2, 1000).unwrap();
        assert!((e2 - SQRT_2 * e1000).abs() < 1e-16);
        assert!(hoeffding_epsilon(&p, 0).is_err());
    }

    #[test]
    fn epsilon_monotonicity() {
        let p = HoeffdingParams::new(0.05, 0.0, 1.0).unwrap();
        let tight = HoeffdingParams::new(0.001, 0.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for n in 1..500 {
            let e = hoeffding_epsilon(&p, n).unwrap();
            assert!(e > 0.0 && e < last);
            assert!(hoeffding_epsilon(&tight, n).unwrap() > e);
            last = e;
        }
    }

    #[test]
    fn hoeffding_params_validation() {
        assert!(HoeffdingParams::new(0.0, 0.05, 1.0).is_err());
        assert!(HoeffdingParams::new(1.0, 0.05, 1.0).is_err());
        assert!(HoeffdingParams::new(0.1, -1.0, 1.0).is_err());
        assert!(HoeffdingParams::new(0.1, 0.05, 0.0).is_err());
    }

    #[test]
    fn criterion_names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(c.algorithm_name().parse::<Criterion>().unwrap(), c);
        }
        assert!("c4.5".parse::<Criterion>().is_err());
    }
}
