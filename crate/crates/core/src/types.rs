//! Labels and stream records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label. `Negative` is the majority class of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Negative,
    Positive,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Negative, ClassLabel::Positive];

    /// Slot used by per-class arrays: Negative = 0, Positive = 1.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            ClassLabel::Negative => 0,
            ClassLabel::Positive => 1,
        }
    }

    /// The `{-1, 1}` encoding used by dataset files.
    pub fn as_signed(self) -> i8 {
        match self {
            ClassLabel::Negative => -1,
            ClassLabel::Positive => 1,
        }
    }
}

/// The label a learner gets to see. `Unlabeled` records are never trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservedLabel {
    Known(ClassLabel),
    Unlabeled,
}

impl ObservedLabel {
    pub fn known(self) -> Option<ClassLabel> {
        match self {
            ObservedLabel::Known(label) => Some(label),
            ObservedLabel::Unlabeled => None,
        }
    }

    pub fn is_known(self) -> bool {
        matches!(self, ObservedLabel::Known(_))
    }
}

/// One stream instance: its features, its ground truth, and what the learner observes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub features: Vec<f64>,
    pub truth: ClassLabel,
    pub observed: ObservedLabel,
}

impl StreamRecord {
    /// Builds a record, rejecting non-finite feature values.
    pub fn new(features: Vec<f64>, truth: ClassLabel, observed: ObservedLabel) -> Result<Self> {
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "feature {pos} is not finite ({})",
                features[pos]
            )));
        }
        Ok(Self {
            features,
            truth,
            observed,
        })
    }

    /// A record whose label is visible to the learner.
    pub fn labeled(features: Vec<f64>, truth: ClassLabel) -> Result<Self> {
        Self::new(features, truth, ObservedLabel::Known(truth))
    }

    pub fn dims(&self) -> usize {
        self.features.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_features() {
        let err = StreamRecord::labeled(vec![1.0, f64::NAN], ClassLabel::Positive).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(StreamRecord::labeled(vec![f64::INFINITY], ClassLabel::Negative).is_err());
    }

    #[test]
    fn label_encoding() {
        assert_eq!(ClassLabel::Negative.index(), 0);
        assert_eq!(ClassLabel::Positive.index(), 1);
        assert_eq!(ClassLabel::Negative.as_signed(), -1);
        assert_eq!(ObservedLabel::Unlabeled.known(), None);
        assert!(ObservedLabel::Known(ClassLabel::Positive).is_known());
    }
}
