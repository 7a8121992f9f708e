//! Imbalance-aware classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ClassLabel;

/// Binary confusion counts, Positive being the minority class of interest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    /// Counts from signed inputs (e.g. parsed files); negative values are rejected.
    pub fn from_signed(tp: i64, fp: i64, tn: i64, fn_: i64) -> Result<Self> {
        let conv = |name: &str, v: i64| {
            u64::try_from(v).map_err(|_| Error::invalid(format!("{name} count is negative ({v})")))
        };
        Ok(Self {
            tp: conv("tp", tp)?,
            fp: conv("fp", fp)?,
            tn: conv("tn", tn)?,
            fn_: conv("fn", fn_)?,
        })
    }

    pub fn record(&mut self, truth: ClassLabel, predicted: ClassLabel) {
        match (truth, predicted) {
            (ClassLabel::Positive, ClassLabel::Positive) => self.tp += 1,
            (ClassLabel::Positive, ClassLabel::Negative) => self.fn_ += 1,
            (ClassLabel::Negative, ClassLabel::Positive) => self.fp += 1,
            (ClassLabel::Negative, ClassLabel::Negative) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn metrics(&self) -> MetricSet {
        MetricSet::from_confusion(self)
    }
}

/// Recall, false positive rate, G-Mean, F1 and precision of one run.
///
/// Zero denominators map to 0 (recall with no positives, FPR with no
/// negatives, precision with no positive predictions, F1 when precision and
/// recall are both 0), which keeps `gmean^2 == recall * (1 - fpr)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub recall: f64,
    pub fpr: f64,
    pub gmean: f64,
    pub fscore: f64,
    pub precision: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricSet {
    pub fn from_confusion(c: &Confusion) -> Self {
        let recall = ratio(c.tp, c.tp + c.fn_);
        let fpr = ratio(c.fp, c.fp + c.tn);
        let precision = ratio(c.tp, c.tp + c.fp);
        let specificity = ratio(c.tn, c.fp + c.tn);
        let gmean = (recall * specificity).sqrt();
        let fscore = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            recall,
            fpr,
            gmean,
            fscore,
            precision,
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Recall => self.recall,
            Metric::Fpr => self.fpr,
            Metric::GMean => self.gmean,
            Metric::FScore => self.fscore,
            Metric::Precision => self.precision,
        }
    }
}

/// `metrics_from_confusion` with signed inputs.
pub fn metrics_from_confusion(tp: i64, fp: i64, tn: i64, fn_: i64) -> Result<MetricSet> {
    Ok(Confusion::from_signed(tp, fp, tn, fn_)?.metrics())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Recall,
    Fpr,
    GMean,
    FScore,
    Precision,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Recall,
        Metric::Fpr,
        Metric::GMean,
        Metric::FScore,
        Metric::Precision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Recall => "recall",
            Metric::Fpr => "fpr",
            Metric::GMean => "gmean",
            Metric::FScore => "fscore",
            Metric::Precision => "precision",
        }
    }
}
