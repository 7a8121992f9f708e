//! Single-pass sufficient statistics kept at tree leaves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ClassLabel;

/// Running count, mean and sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianStat {
    count: u64,
    mean: f64,
    m2: f64,
}

impl GaussianStat {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stat from already-known moments. `m2` must be non-negative
    /// and an empty stat must carry zero moments.
    pub fn from_parts(count: u64, mean: f64, m2: f64) -> Result<Self> {
        if !mean.is_finite() || !m2.is_finite() || m2 < 0.0 {
            return Err(Error::invalid(format!(
                "gaussian moments out of range: mean={mean}, m2={m2}"
            )));
        }
        if count == 0 && (mean != 0.0 || m2 != 0.0) {
            return Err(Error::invalid("empty gaussian stat must have zero moments"));
        }
        Ok(Self { count, mean, m2 })
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite observation {x}")));
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        // rounding can push m2 a hair below zero on near-constant input
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
        Ok(())
    }

    /// Combines two disjoint summaries (Chan et al. parallel update).
    pub fn merge(&self, other: &GaussianStat) -> GaussianStat {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        GaussianStat {
            count,
            mean,
            m2: m2.max(0.0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Population variance; zero for an empty stat.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Per-class counts over fixed bins of one feature.
///
/// Bins are half-open `[edges[j], edges[j+1])`. Values below the first edge
/// land in bin 0 and values at or above the last edge land in the last bin,
/// so every update is counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassHistogram {
    edges: Vec<f64>,
    counts_pos: Vec<u64>,
    counts_neg: Vec<u64>,
}

impl ClassHistogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::invalid(format!(
                "histogram needs at least 2 bins, got {} edges",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("histogram edges must be finite"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "histogram edges must be strictly increasing",
            ));
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts_pos: vec![0; bins],
            counts_neg: vec![0; bins],
        })
    }

    /// `bins` equal-width bins spanning `[lo, hi]`. A degenerate range is
    /// widened by half a unit on each side.
    pub fn equal_width(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::invalid(format!("bad histogram range [{lo}, {hi}]")));
        }
        let (lo, hi) = if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        };
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|j| lo + width * j as f64).collect();
        if let Some(last) = edges.last_mut() {
            *last = hi;
        }
        Self::new(edges)
    }

    /// Builds a histogram with pre-filled counts (used by tests and deserialization checks).
    pub fn from_counts(
        edges: Vec<f64>,
        counts_pos: Vec<u64>,
        counts_neg: Vec<u64>,
    ) -> Result<Self> {
        let mut h = Self::new(edges)?;
        if counts_pos.len() != h.bins() || counts_neg.len() != h.bins() {
            return Err(Error::invalid("count vectors must have one entry per bin"));
        }
        h.counts_pos = counts_pos;
        h.counts_neg = counts_neg;
        Ok(h)
    }

    /// Index of the bin `x` falls into, after clamping.
    pub fn bin_of(&self, x: f64) -> usize {
        let upper = self.edges.partition_point(|&e| e <= x);
        upper.saturating_sub(1).min(self.bins() - 1)
    }

    pub fn update(&mut self, x: f64, label: ClassLabel) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite observation {x}")));
        }
        let bin = self.bin_of(x);
        match label {
            ClassLabel::Positive => self.counts_pos[bin] += 1,
            ClassLabel::Negative => self.counts_neg[bin] += 1,
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self, label: ClassLabel) -> &[u64] {
        match label {
            ClassLabel::Positive => &self.counts_pos,
            ClassLabel::Negative => &self.counts_neg,
        }
    }

    pub fn total(&self, label: ClassLabel) -> u64 {
        self.counts(label).iter().sum()
    }

    /// Scales every count of one class by `k`.
    pub fn scale_class(&mut self, label: ClassLabel, k: u64) {
        let counts = match label {
            ClassLabel::Positive => &mut self.counts_pos,
            ClassLabel::Negative => &mut self.counts_neg,
        };
        counts.iter_mut().for_each(|c| *c *= k);
    }
}
