//! Test-then-train evaluation of a single stream.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::Confusion;
use crate::tree::{FeatureRange, HoeffdingTree, TreeConfig};
use crate::types::StreamRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub confusion: Confusion,
    /// Evaluation records seen (pre-training excluded).
    pub instances_processed: u64,
    /// Evaluation records whose label reached the learner.
    pub labeled: u64,
    /// Splits over the whole run, pre-training included.
    pub splits: u64,
    pub leaves: usize,
    pub depth: usize,
    pub memory_cells: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Per-feature min/max of `records`, or `None` when there are none.
pub fn feature_ranges(records: &[StreamRecord]) -> Option<Vec<FeatureRange>> {
    let first = records.first()?;
    let mut ranges: Vec<FeatureRange> = first
        .features
        .iter()
        .map(|&x| FeatureRange::new(x, x))
        .collect();
    for r in &records[1..] {
        for (range, &x) in ranges.iter_mut().zip(&r.features) {
            range.min = range.min.min(x);
            range.max = range.max.max(x);
        }
    }
    Some(ranges)
}

/// A tree whose root histograms span the pre-training data, trained on it.
pub fn pretrained_tree(
    config: TreeConfig,
    n_features: usize,
    pretrain: &[StreamRecord],
) -> Result<HoeffdingTree> {
    let mut tree = match feature_ranges(pretrain) {
        Some(ranges) => HoeffdingTree::with_feature_ranges(config, &ranges)?,
        None => HoeffdingTree::new(config, n_features)?,
    };
    for r in pretrain {
        tree.train_one(r)?;
    }
    Ok(tree)
}

/// Predicts every record before (optionally) training on it. Unlabeled
/// records are scored against their ground truth but never trained on.
pub fn evaluate(tree: &mut HoeffdingTree, eval: &[StreamRecord]) -> Result<RunResult> {
    let start = Instant::now();
    let mut confusion = Confusion::default();
    let mut labeled = 0;
    for r in eval {
        let predicted = tree.predict(&r.features)?;
        confusion.record(r.truth, predicted);
        if r.observed.is_known() {
            tree.train_one(r)?;
            labeled += 1;
        }
    }
    Ok(RunResult {
        confusion,
        instances_processed: eval.len() as u64,
        labeled,
        splits: tree.splits(),
        leaves: tree.leaf_count(),
        depth: tree.depth(),
        memory_cells: tree.memory_cells(),
        wall_time: start.elapsed(),
    })
}

pub fn run_prequential(
    config: TreeConfig,
    n_features: usize,
    pretrain: &[StreamRecord],
    eval: &[StreamRecord],
) -> Result<RunResult> {
    let start = Instant::now();
    let mut tree = pretrained_tree(config, n_features, pretrain)?;
    let mut result = evaluate(&mut tree, eval)?;
    result.wall_time = start.elapsed();
    Ok(result)
}
