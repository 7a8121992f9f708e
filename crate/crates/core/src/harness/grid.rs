//! Paired experiment grid over algorithms, imbalance ratios, labeling
//! fractions and repeats.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::prequential::{run_prequential, RunResult};
use super::stream::{build_stream, StreamSpec};
use crate::error::{Error, Result};
use crate::split::Criterion;
use crate::tree::TreeConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub algorithms: Vec<Criterion>,
    pub ratios: Vec<u64>,
    pub labelings: Vec<f64>,
    pub repeats: u32,
    /// Repeat `i` uses seed `base_seed + i` for every algorithm, so all
    /// algorithms see identical streams.
    pub base_seed: u64,
    pub pretrain_pos: usize,
    pub pretrain_neg: usize,
    pub shuffle: bool,
    pub max_eval_positives: Option<usize>,
    /// Shared tree settings; the criterion is taken from `algorithms`.
    pub tree: TreeConfig,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            algorithms: Criterion::ALL.to_vec(),
            ratios: vec![10, 100, 1000, 10_000],
            labelings: vec![0.1, 0.5, 0.75, 1.0],
            repeats: 10,
            base_seed: 1,
            pretrain_pos: 200,
            pretrain_neg: 1000,
            shuffle: true,
            max_eval_positives: None,
            tree: TreeConfig::default(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() || self.ratios.is_empty() || self.labelings.is_empty() {
            return Err(Error::Config(
                "algorithms, ratios and labelings must be non-empty".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        for &ratio in &self.ratios {
            self.stream_spec(ratio, 0.0, 0).validate()?;
        }
        for &l in &self.labelings {
            self.stream_spec(1, l, 0).validate()?;
        }
        self.tree.validate()
    }

    pub fn seed(&self, repeat: u32) -> u64 {
        self.base_seed.wrapping_add(repeat as u64)
    }

    pub fn stream_spec(&self, ratio: u64, labeling: f64, seed: u64) -> StreamSpec {
        StreamSpec {
            ratio,
            labeling_fraction: labeling,
            pretrain_pos: self.pretrain_pos,
            pretrain_neg: self.pretrain_neg,
            seed,
            shuffle: self.shuffle,
            max_eval_positives: self.max_eval_positives,
        }
    }

    pub fn run_count(&self) -> usize {
        self.algorithms.len() * self.ratios.len() * self.labelings.len() * self.repeats as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunKey {
    pub algorithm: Criterion,
    pub ratio: u64,
    pub labeling: f64,
    pub repeat: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed(RunResult),
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub key: RunKey,
    #[serde(flatten)]
    pub outcome: RunOutcome,
}

impl RunRecord {
    pub fn result(&self) -> Option<&RunResult> {
        match &self.outcome {
            RunOutcome::Completed(r) => Some(r),
            RunOutcome::Failed { .. } => None,
        }
    }
}

/// Runs every grid cell on the current rayon pool. Results come back in
/// grid order (algorithm, ratio, labeling, repeat) regardless of thread
/// count. A failing cell is recorded and the rest of the grid still runs.
pub fn run_grid(dataset: &Dataset, spec: &GridSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let mut units = Vec::new();
    for ri in 0..spec.ratios.len() {
        for li in 0..spec.labelings.len() {
            for rep in 0..spec.repeats {
                units.push((ri, li, rep));
            }
        }
    }
    let mut tagged: Vec<((usize, usize, usize, u32), RunRecord)> = units
        .par_iter()
        .flat_map_iter(|&(ri, li, rep)| {
            let ratio = spec.ratios[ri];
            let labeling = spec.labelings[li];
            let seed = spec.seed(rep);
            let stream = build_stream(dataset, &spec.stream_spec(ratio, labeling, seed));
            spec.algorithms
                .iter()
                .enumerate()
                .map(|(ai, &algorithm)| {
                    let outcome = match &stream {
                        Err(e) => RunOutcome::Failed {
                            error: e.to_string(),
                        },
                        Ok(s) => {
                            let config = TreeConfig {
                                criterion: algorithm,
                                ..spec.tree
                            };
                            match run_prequential(config, dataset.dims(), &s.pretrain, &s.eval) {
                                Ok(r) => RunOutcome::Completed(r),
                                Err(e) => RunOutcome::Failed {
                                    error: e.to_string(),
                                },
                            }
                        }
                    };
                    let key = RunKey {
                        algorithm,
                        ratio,
                        labeling,
                        repeat: rep,
                        seed,
                    };
                    ((ai, ri, li, rep), RunRecord { key, outcome })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    tagged.sort_by_key(|(k, _)| *k);
    Ok(tagged.into_iter().map(|(_, r)| r).collect())
}
