//! Incremental Hoeffding tree parameterized by split criterion.
//!
//! Leaves keep per-class running statistics for every feature. Once a leaf
//! has seen both classes and `grace_period` labeled instances have arrived
//! since its last attempt, the two best features are scored and the leaf
//! splits when the score gap beats the Hoeffding bound (or the bound drops
//! below `tau`). Children start from zeroed statistics.

mod leaf;

use serde::{Deserialize, Serialize};

pub use leaf::{FeatureRange, LeafStats};

use crate::error::{Error, Result};
use crate::split::{best_two_features, hoeffding_epsilon, Criterion, HoeffdingParams};
use crate::types::{ClassLabel, StreamRecord};

/// Number of classes.
pub const CLASSES: usize = 2;

/// Version tag written into serialized trees.
pub const TREE_FORMAT_VERSION: u32 = 1;
const TREE_FORMAT_NAME: &str = "ghvfdt-tree";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub criterion: Criterion,
    pub delta: f64,
    pub tau: f64,
    pub bins: usize,
    pub grace_period: u64,
    /// Cap on leaves carrying statistics; 0 disables it.
    pub max_leaves: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            criterion: Criterion::HellingerGaussian,
            delta: 1e-7,
            tau: 0.05,
            bins: 10,
            grace_period: 200,
            max_leaves: 0,
        }
    }
}

impl TreeConfig {
    pub fn with_criterion(criterion: Criterion) -> Self {
        Self {
            criterion,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        HoeffdingParams::for_criterion(self.criterion, self.delta, self.tau)?;
        if self.bins < 2 {
            return Err(Error::Config(format!(
                "bins must be >= 2, got {}",
                self.bins
            )));
        }
        if self.grace_period < 1 {
            return Err(Error::Config("grace_period must be >= 1".into()));
        }
        Ok(())
    }

    pub fn hoeffding(&self) -> Result<HoeffdingParams> {
        HoeffdingParams::for_criterion(self.criterion, self.delta, self.tau)
    }
}

/// Outcome of training on one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitEvent {
    NoSplit,
    Split {
        leaf_id: usize,
        feature: usize,
        threshold: f64,
        /// Labeled instances the leaf had seen when it split.
        n_seen: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub stats: LeafStats,
    pub majority: ClassLabel,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTree {
    config: TreeConfig,
    n_features: usize,
    /// Node 0 is the root.
    nodes: Vec<TreeNode>,
    splits: u64,
}

#[derive(Serialize, Deserialize)]
struct TreeDocument {
    format: String,
    version: u32,
    tree: HoeffdingTree,
}

impl HoeffdingTree {
    /// A single-leaf tree whose root histograms span `[0, 1]` per feature.
    pub fn new(config: TreeConfig, n_features: usize) -> Result<Self> {
        let ranges = vec![FeatureRange::new(0.0, 1.0); n_features];
        Self::with_feature_ranges(config, &ranges)
    }

    /// A single-leaf tree whose root histogram bins span the given ranges,
    /// typically the min/max observed over the pre-training sample.
    pub fn with_feature_ranges(config: TreeConfig, ranges: &[FeatureRange]) -> Result<Self> {
        config.validate()?;
        if ranges.is_empty() {
            return Err(Error::Config("tree needs at least one feature".into()));
        }
        let root = Self::fresh_leaf(&config, ranges.len(), ranges, ClassLabel::Negative)?;
        Ok(Self {
            config,
            n_features: ranges.len(),
            nodes: vec![root],
            splits: 0,
        })
    }

    fn fresh_leaf(
        config: &TreeConfig,
        n_features: usize,
        ranges: &[FeatureRange],
        prior: ClassLabel,
    ) -> Result<TreeNode> {
        let bin_ranges = config.criterion.uses_histograms().then_some(ranges);
        Ok(TreeNode::Leaf(Leaf {
            stats: LeafStats::new(n_features, bin_ranges, config.bins)?,
            majority: prior,
            active: true,
        }))
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Number of splits performed so far.
    pub fn splits(&self) -> u64 {
        self.splits
    }

    fn check_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("feature {pos} is not finite")));
        }
        Ok(())
    }

    /// Index of the leaf a feature vector is routed to.
    pub fn sort(&self, features: &[f64]) -> Result<usize> {
        self.check_features(features)?;
        Ok(self.route(features))
    }

    fn route(&self, features: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    id = if features[*feature_index] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf(_) => return id,
            }
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<ClassLabel> {
        let id = self.sort(features)?;
        match &self.nodes[id] {
            TreeNode::Leaf(leaf) => Ok(leaf.majority),
            TreeNode::Internal { .. } => unreachable!("route ends at a leaf"),
        }
    }

    pub fn leaf(&self, id: usize) -> Option<&Leaf> {
        match self.nodes.get(id) {
            Some(TreeNode::Leaf(leaf)) => Some(leaf),
            _ => None,
        }
    }

    fn leaf_mut(&mut self, id: usize) -> &mut Leaf {
        match &mut self.nodes[id] {
            TreeNode::Leaf(leaf) => leaf,
            TreeNode::Internal { .. } => unreachable!("node {id} is not a leaf"),
        }
    }

    /// `(node id, leaf)` pairs in arena order.
    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Leaf)> {
        self.nodes.iter().enumerate().filter_map(|(id, n)| match n {
            TreeNode::Leaf(leaf) => Some((id, leaf)),
            TreeNode::Internal { .. } => None,
        })
    }

    /// Updates the leaf `record` sorts to and splits it when the Hoeffding
    /// test passes. Unlabeled records are an error.
    pub fn train_one(&mut self, record: &StreamRecord) -> Result<SplitEvent> {
        let label = record.observed.known().ok_or(Error::Unlabeled)?;
        self.check_features(&record.features)?;
        let id = self.route(&record.features);
        let grace = self.config.grace_period;

        let leaf = self.leaf_mut(id);
        leaf.stats.update(&record.features, label)?;
        let pos = leaf.stats.class_count(ClassLabel::Positive);
        let neg = leaf.stats.class_count(ClassLabel::Negative);
        if pos > neg {
            leaf.majority = ClassLabel::Positive;
        } else if neg > pos {
            leaf.majority = ClassLabel::Negative;
        }

        if !leaf.active || leaf.stats.is_pure() || leaf.stats.seen_since_attempt() < grace {
            return Ok(SplitEvent::NoSplit);
        }
        leaf.stats.reset_attempt_counter();
        self.attempt_split(id)
    }

    fn attempt_split(&mut self, id: usize) -> Result<SplitEvent> {
        let params = self.config.hoeffding()?;
        let leaf = self.leaf(id).expect("attempt on a leaf");
        let Some(top) = best_two_features(&leaf.stats, self.config.criterion)? else {
            return Ok(SplitEvent::NoSplit);
        };
        let n_seen = leaf.stats.total();
        let epsilon = hoeffding_epsilon(&params, n_seen)?;
        if !(top.gap() > epsilon || epsilon < params.tau) {
            return Ok(SplitEvent::NoSplit);
        }
        let feature = top.best.feature_index;
        let threshold = top.best.threshold;
        self.split_leaf(id, feature, threshold)?;
        Ok(SplitEvent::Split {
            leaf_id: id,
            feature,
            threshold,
            n_seen,
        })
    }

    fn split_leaf(&mut self, id: usize, feature: usize, threshold: f64) -> Result<()> {
        let parent = self.leaf(id).expect("split target is a leaf").clone();
        let prior = parent.majority;

        let (left_ranges, right_ranges): (Vec<_>, Vec<_>) = (0..self.n_features)
            .map(|j| {
                let observed = parent
                    .stats
                    .observed_range(j)
                    .or_else(|| {
                        parent
                            .stats
                            .histogram(j)
                            .map(|h| FeatureRange::new(h.edges()[0], h.edges()[h.bins()]))
                    })
                    .unwrap_or(FeatureRange::new(0.0, 1.0));
                if j == feature {
                    let cut = threshold.clamp(observed.min, observed.max);
                    (
                        FeatureRange::new(observed.min, cut),
                        FeatureRange::new(cut, observed.max),
                    )
                } else {
                    (observed, observed)
                }
            })
            .unzip();

        let left = Self::fresh_leaf(&self.config, self.n_features, &left_ranges, prior)?;
        let right = Self::fresh_leaf(&self.config, self.n_features, &right_ranges, prior)?;
        let left_id = self.nodes.len();
        self.nodes.push(left);
        self.nodes.push(right);
        self.nodes[id] = TreeNode::Internal {
            feature_index: feature,
            threshold,
            left: left_id,
            right: left_id + 1,
        };
        self.splits += 1;
        self.enforce_leaf_cap();
        Ok(())
    }

    /// Deactivates the least promising active leaves until the cap holds.
    /// Promise is the number of labeled instances outside the leaf's majority.
    fn enforce_leaf_cap(&mut self) {
        let cap = self.config.max_leaves;
        if cap == 0 {
            return;
        }
        let mut active: Vec<(u64, usize)> = self
            .leaves()
            .filter(|(_, l)| l.active)
            .map(|(id, l)| {
                let promise = l.stats.total()
                    - l.stats
                        .class_count(ClassLabel::Positive)
                        .max(l.stats.class_count(ClassLabel::Negative));
                (promise, id)
            })
            .collect();
        if active.len() <= cap {
            return;
        }
        active.sort_unstable();
        let excess = active.len() - cap;
        for &(_, id) in &active[..excess] {
            let leaf = self.leaf_mut(id);
            leaf.active = false;
            leaf.stats.release();
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn active_leaf_count(&self) -> usize {
        self.leaves().filter(|(_, l)| l.active).count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut max_depth = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            match &self.nodes[id] {
                TreeNode::Internal { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
                TreeNode::Leaf(_) => max_depth = max_depth.max(d),
            }
        }
        max_depth
    }

    /// Statistic cells held by one active leaf: a mean and a deviation per
    /// (feature, class), plus `bins` counters per (feature, class) when the
    /// criterion is binned.
    pub fn cells_per_leaf(&self) -> usize {
        let f = self.n_features;
        let hist = if self.config.criterion.uses_histograms() {
            self.config.bins * CLASSES
        } else {
            0
        };
        f * (2 * CLASSES + hist)
    }

    /// Statistic cells held by the whole tree: `cells_per_leaf` for every
    /// active leaf plus two (feature, threshold) per internal node. Class
    /// counters, bin edges and observed ranges are bookkeeping and not counted.
    pub fn memory_cells(&self) -> usize {
        self.active_leaf_count() * self.cells_per_leaf() + 2 * self.internal_count()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TreeDocument {
            format: TREE_FORMAT_NAME.to_string(),
            version: TREE_FORMAT_VERSION,
            tree: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeDocument = serde_json::from_str(text)?;
        if doc.format != TREE_FORMAT_NAME {
            return Err(Error::invalid(format!(
                "not a tree document: '{}'",
                doc.format
            )));
        }
        if doc.version != TREE_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported tree format version {}",
                doc.version
            )));
        }
        let tree = doc.tree;
        tree.config.validate()?;
        let n = tree.nodes.len();
        for node in &tree.nodes {
            match node {
                TreeNode::Internal {
                    feature_index,
                    left,
                    right,
                    ..
                } => {
                    if *feature_index >= tree.n_features || *left >= n || *right >= n {
                        return Err(Error::invalid("tree document has dangling node references"));
                    }
                }
                TreeNode::Leaf(leaf) => {
                    if leaf.active && leaf.stats.n_features() != tree.n_features {
                        return Err(Error::invalid("leaf statistics do not match n_features"));
                    }
                }
            }
        }
        Ok(tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ObservedLabel;

    fn rec(x: Vec<f64>, label: ClassLabel) -> StreamRecord {
        StreamRecord::labeled(x, label).unwrap()
    }

    #[test]
    fn fresh_tree_shape() {
        let t = HoeffdingTree::new(TreeConfig::default(), 3).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&[0.1, 0.2, 0.3]).unwrap(), ClassLabel::Negative);
    }

    #[test]
    fn majority_at_root() {
        let mut t = HoeffdingTree::new(TreeConfig::default(), 2).unwrap();
        for (x, l) in [
            (0.1, ClassLabel::Positive),
            (0.2, ClassLabel::Positive),
            (0.3, ClassLabel::Positive),
            (0.4, ClassLabel::Negative),
        ] {
            assert_eq!(
                t.train_one(&rec(vec![x, x], l)).unwrap(),
                SplitEvent::NoSplit
            );
        }
        assert_eq!(t.predict(&[100.0, -5.0]).unwrap(), ClassLabel::Positive);
    }

    #[test]
    fn dimension_mismatch() {
        let t = HoeffdingTree::new(TreeConfig::default(), 2).unwrap();
        assert!(matches!(
            t.predict(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(t.predict(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn unlabeled_training_is_an_error() {
        let mut t = HoeffdingTree::new(TreeConfig::default(), 1).unwrap();
        let r =
            StreamRecord::new(vec![0.5], ClassLabel::Positive, ObservedLabel::Unlabeled).unwrap();
        assert!(matches!(t.train_one(&r), Err(Error::Unlabeled)));
    }

    #[test]
    fn pure_leaf_never_splits() {
        let cfg = TreeConfig {
            grace_period: 1,
            tau: 1.0,
            ..TreeConfig::with_criterion(Criterion::HellingerBinned)
        };
        let mut t = HoeffdingTree::new(cfg, 2).unwrap();
        for i in 0..2000 {
            let x = (i % 100) as f64 / 100.0;
            let ev = t
                .train_one(&rec(vec![x, 1.0 - x], ClassLabel::Negative))
                .unwrap();
            assert_eq!(ev, SplitEvent::NoSplit);
        }
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn routing_by_threshold() {
        // one labeled pair per side, every instance checked, tau forces the split
        let cfg = TreeConfig {
            grace_period: 1,
            tau: 10.0,
            ..TreeConfig::with_criterion(Criterion::HellingerGaussian)
        };
        let mut t = HoeffdingTree::new(cfg, 2).unwrap();
        let data = [
            (vec![0.1, 0.3], ClassLabel::Negative),
            (vec![0.9, 0.3], ClassLabel::Positive),
            (vec![0.2, 0.3], ClassLabel::Negative),
            (vec![0.8, 0.3], ClassLabel::Positive),
        ];
        let mut split = None;
        for (x, l) in data {
            if let SplitEvent::Split {
                feature, threshold, ..
            } = t.train_one(&rec(x, l)).unwrap()
            {
                split = Some((feature, threshold));
            }
        }
        let (feature, threshold) = split.expect("split happened");
        assert_eq!(feature, 0);
        assert!((threshold - 0.5).abs() < 1e-12);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.depth(), 1);
        // children inherit the parent's majority, Negative after a 2/2 tie
        t.train_one(&rec(vec![0.7, 0.0], ClassLabel::Positive))
            .unwrap();
        t.train_one(&rec(vec![0.3, 0.0], ClassLabel::Negative))
            .unwrap();
        assert_eq!(t.predict(&[0.7, 0.0]).unwrap(), ClassLabel::Positive);
        assert_eq!(t.predict(&[0.2, 0.0]).unwrap(), ClassLabel::Negative);
        // value equal to the threshold goes right
        assert_eq!(t.sort(&[threshold, 0.0]).unwrap(), 2);
    }

    #[test]
    fn children_are_zeroed() {
        let cfg = TreeConfig {
            grace_period: 1,
            tau: 1.0,
            ..TreeConfig::with_criterion(Criterion::HellingerBinned)
        };
        let mut t = HoeffdingTree::new(cfg, 2).unwrap();
        let mut i = 0;
        while t.splits() == 0 {
            let l = if i % 2 == 0 {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            };
            let x = if l == ClassLabel::Positive { 0.8 } else { 0.2 };
            t.train_one(&rec(vec![x, 0.5], l)).unwrap();
            i += 1;
        }
        for (_, leaf) in t.leaves() {
            assert_eq!(leaf.stats.total(), 0);
            for j in 0..2 {
                for c in ClassLabel::ALL {
                    assert_eq!(leaf.stats.gaussian(j, c).count(), 0);
                    assert_eq!(leaf.stats.histogram(j).unwrap().total(c), 0);
                }
            }
        }
    }

    #[test]
    fn leaf_cap_deactivates() {
        let cfg = TreeConfig {
            grace_period: 1,
            tau: 1.0,
            max_leaves: 2,
            ..TreeConfig::with_criterion(Criterion::HellingerGaussian)
        };
        let mut t = HoeffdingTree::new(cfg, 1).unwrap();
        let mut state = 12345u64;
        for _ in 0..4000 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let l = if u < 0.5 {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            };
            t.train_one(&rec(vec![u], l)).unwrap();
        }
        assert!(t.active_leaf_count() <= 2);
        assert!(t.leaf_count() >= 2);
        assert_eq!(
            t.memory_cells(),
            t.active_leaf_count() * 4 + 2 * t.internal_count()
        );
    }

    #[test]
    fn json_round_trip() {
        let mut t = HoeffdingTree::new(TreeConfig::with_criterion(Criterion::InfoGain), 2).unwrap();
        for i in 0..50 {
            let l = if i % 3 == 0 {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            };
            t.train_one(&rec(vec![i as f64 / 50.0, 0.5], l)).unwrap();
        }
        let text = t.to_json().unwrap();
        assert!(text.contains("\"format\": \"ghvfdt-tree\""));
        let back = HoeffdingTree::from_json(&text).unwrap();
        assert_eq!(back, t);
        let bumped = text.replace("\"version\": 1", "\"version\": 99");
        assert!(HoeffdingTree::from_json(&bumped).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = TreeConfig {
            bins: 1,
            ..TreeConfig::default()
        };
        assert!(HoeffdingTree::new(bad, 2).is_err());
        let bad = TreeConfig {
            grace_period: 0,
            ..TreeConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TreeConfig {
            delta: 1.5,
            ..TreeConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(HoeffdingTree::new(TreeConfig::default(), 0).is_err());
    }
}
