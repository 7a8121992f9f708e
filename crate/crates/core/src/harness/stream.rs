//! Imbalanced, partially labeled streams drawn from a binary dataset.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::{ClassLabel, ObservedLabel, StreamRecord};

/// How to draw one stream from a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    /// Negatives per positive in the evaluation segment (`+1:-r`).
    pub ratio: u64,
    /// Fraction of evaluation records whose label the learner sees, in `[0, 1]`.
    pub labeling_fraction: f64,
    pub pretrain_pos: usize,
    pub pretrain_neg: usize,
    pub seed: u64,
    /// When false, records keep their dataset order.
    pub shuffle: bool,
    /// Optional cap on evaluation positives (shorter streams for quick runs).
    pub max_eval_positives: Option<usize>,
}

impl StreamSpec {
    pub fn new(ratio: u64, labeling_fraction: f64, seed: u64) -> Self {
        Self {
            ratio,
            labeling_fraction,
            pretrain_pos: 200,
            pretrain_neg: 1000,
            seed,
            shuffle: true,
            max_eval_positives: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratio == 0 {
            return Err(Error::Config("imbalance ratio must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.labeling_fraction) {
            return Err(Error::Config(format!(
                "labeling fraction must lie in [0, 1], got {}",
                self.labeling_fraction
            )));
        }
        Ok(())
    }
}

/// A materialized stream: balanced-ish pre-training block, then the
/// imbalanced evaluation segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub source: String,
    pub spec: StreamSpec,
    pub pretrain: Vec<StreamRecord>,
    pub eval: Vec<StreamRecord>,
    /// Dataset row of each evaluation record.
    pub eval_rows: Vec<usize>,
}

impl Stream {
    pub fn eval_positives(&self) -> usize {
        self.eval
            .iter()
            .filter(|r| r.truth == ClassLabel::Positive)
            .count()
    }

    pub fn eval_negatives(&self) -> usize {
        self.eval.len() - self.eval_positives()
    }

    pub fn labeled_count(&self) -> usize {
        self.eval.iter().filter(|r| r.observed.is_known()).count()
    }
}

/// Number of labeled records for `n` records at fraction `f`, rounding halves up.
pub fn labeled_quota(n: usize, f: f64) -> usize {
    ((f * n as f64) + 0.5).floor().min(n as f64) as usize
}

/// Builds a stream. Pre-training quotas are taken first from each class;
/// the evaluation segment then holds `p = min(P', floor(N' / r))` positives
/// and `r * p` negatives, where `P'` and `N'` are what remains.
///
/// Record selection and order depend only on the dataset, ratio and seed;
/// the labeling mask comes from a separate random stream, so the same seed
/// gives the same records at every labeling fraction.
pub fn build_stream(dataset: &Dataset, spec: &StreamSpec) -> Result<Stream> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut mask_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    mask_rng.set_stream(1);

    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, &label) in dataset.labels().iter().enumerate() {
        match label {
            ClassLabel::Positive => pos.push(i),
            ClassLabel::Negative => neg.push(i),
        }
    }
    if pos.len() < spec.pretrain_pos || neg.len() < spec.pretrain_neg {
        return Err(Error::Config(format!(
            "{}: {} positives and {} negatives cannot cover the pre-training quotas ({} and {})",
            dataset.name,
            pos.len(),
            neg.len(),
            spec.pretrain_pos,
            spec.pretrain_neg
        )));
    }
    if spec.shuffle {
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
    }

    let mut pretrain_rows: Vec<usize> = pos[..spec.pretrain_pos]
        .iter()
        .chain(&neg[..spec.pretrain_neg])
        .copied()
        .collect();
    let pos_rest = &pos[spec.pretrain_pos..];
    let neg_rest = &neg[spec.pretrain_neg..];
    let mut n_pos = pos_rest.len().min(neg_rest.len() / spec.ratio as usize);
    if let Some(cap) = spec.max_eval_positives {
        n_pos = n_pos.min(cap);
    }
    if n_pos == 0 {
        return Err(Error::Config(format!(
            "{}: ratio +1:-{} leaves no positives for evaluation ({} positives and {} negatives after pre-training)",
            dataset.name,
            spec.ratio,
            pos_rest.len(),
            neg_rest.len()
        )));
    }
    let n_neg = n_pos * spec.ratio as usize;
    let mut eval_rows: Vec<usize> = pos_rest[..n_pos]
        .iter()
        .chain(&neg_rest[..n_neg])
        .copied()
        .collect();
    if spec.shuffle {
        pretrain_rows.shuffle(&mut rng);
        eval_rows.shuffle(&mut rng);
    } else {
        pretrain_rows.sort_unstable();
        eval_rows.sort_unstable();
    }

    let k = labeled_quota(eval_rows.len(), spec.labeling_fraction);
    let mut visible = vec![false; eval_rows.len()];
    for i in index::sample(&mut mask_rng, eval_rows.len(), k) {
        visible[i] = true;
    }

    let record = |row: usize, observed: bool| {
        let truth = dataset.label(row);
        StreamRecord {
            features: dataset.row(row).to_vec(),
            truth,
            observed: if observed {
                ObservedLabel::Known(truth)
            } else {
                ObservedLabel::Unlabeled
            },
        }
    };
    let pretrain = pretrain_rows.iter().map(|&r| record(r, true)).collect();
    let eval = eval_rows
        .iter()
        .zip(&visible)
        .map(|(&r, &v)| record(r, v))
        .collect();
    Ok(Stream {
        source: dataset.name.clone(),
        spec: spec.clone(),
        pretrain,
        eval,
        eval_rows,
    })
}
