use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::{ClassHistogram, GaussianStat};
use crate::types::ClassLabel;

/// Observed value range of one feature at a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn include(&mut self, x: f64) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn is_empty(&self) -> bool {
        self.min > self.max
    }
}

/// Sufficient statistics of one leaf.
///
/// Gaussian cells are always kept. Histograms (and the observed ranges used
/// to place child bins) exist only for binned criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    gaussians: Vec<[GaussianStat; 2]>,
    histograms: Option<Vec<ClassHistogram>>,
    ranges: Option<Vec<FeatureRange>>,
    class_counts: [u64; 2],
    seen_since_attempt: u64,
}

impl LeafStats {
    /// Fresh, zeroed statistics. `bin_ranges` carries one range per feature
    /// when histograms are wanted.
    pub fn new(
        n_features: usize,
        bin_ranges: Option<&[FeatureRange]>,
        bins: usize,
    ) -> Result<Self> {
        let histograms = match bin_ranges {
            Some(ranges) => Some(
                ranges
                    .iter()
                    .map(|r| ClassHistogram::equal_width(r.min, r.max, bins))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(Self {
            gaussians: vec![[GaussianStat::new(); 2]; n_features],
            ranges: histograms
                .as_ref()
                .map(|_| vec![FeatureRange::empty(); n_features]),
            histograms,
            class_counts: [0, 0],
            seen_since_attempt: 0,
        })
    }

    /// Assembles statistics from prepared parts (tests and tooling).
    pub fn from_parts(
        gaussians: Vec<[GaussianStat; 2]>,
        histograms: Option<Vec<ClassHistogram>>,
        class_counts: [u64; 2],
    ) -> Self {
        let n = gaussians.len();
        Self {
            gaussians,
            ranges: histograms.as_ref().map(|_| vec![FeatureRange::empty(); n]),
            histograms,
            class_counts,
            seen_since_attempt: 0,
        }
    }

    /// Caller has already validated length and finiteness.
    pub(crate) fn update(&mut self, features: &[f64], label: ClassLabel) -> Result<()> {
        let k = label.index();
        for (cells, &x) in self.gaussians.iter_mut().zip(features) {
            cells[k].update(x)?;
        }
        if let Some(histograms) = self.histograms.as_mut() {
            for (h, &x) in histograms.iter_mut().zip(features) {
                h.update(x, label)?;
            }
        }
        if let Some(ranges) = self.ranges.as_mut() {
            for (r, &x) in ranges.iter_mut().zip(features) {
                r.include(x);
            }
        }
        self.class_counts[k] += 1;
        self.seen_since_attempt += 1;
        Ok(())
    }

    /// Drops the per-feature statistics, keeping only class counts.
    pub(crate) fn release(&mut self) {
        self.gaussians = Vec::new();
        self.histograms = None;
        self.ranges = None;
    }

    pub(crate) fn reset_attempt_counter(&mut self) {
        self.seen_since_attempt = 0;
    }

    pub fn n_features(&self) -> usize {
        self.gaussians.len()
    }

    pub fn gaussian(&self, feature: usize, label: ClassLabel) -> &GaussianStat {
        &self.gaussians[feature][label.index()]
    }

    pub fn histogram(&self, feature: usize) -> Option<&ClassHistogram> {
        self.histograms.as_ref().map(|h| &h[feature])
    }

    pub fn has_histograms(&self) -> bool {
        self.histograms.is_some()
    }

    pub fn observed_range(&self, feature: usize) -> Option<FeatureRange> {
        self.ranges
            .as_ref()
            .map(|r| r[feature])
            .filter(|r| !r.is_empty())
    }

    pub fn class_count(&self, label: ClassLabel) -> u64 {
        self.class_counts[label.index()]
    }

    pub fn total(&self) -> u64 {
        self.class_counts[0] + self.class_counts[1]
    }

    pub fn seen_since_attempt(&self) -> u64 {
        self.seen_since_attempt
    }

    pub fn is_pure(&self) -> bool {
        self.class_counts[0] == 0 || self.class_counts[1] == 0
    }
}
