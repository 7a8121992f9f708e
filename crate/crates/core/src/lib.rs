//! Incremental Hoeffding trees with skew-insensitive Hellinger split
//! criteria, plus a prequential harness for imbalanced, partially labeled
//! streams.

pub mod cli;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod significance;
pub mod split;
pub mod stats;
pub mod tree;
pub mod types;

pub use error::{Error, Result};
pub use split::{Criterion, HoeffdingParams, SplitScore};
pub use stats::{ClassHistogram, GaussianStat};
pub use tree::{HoeffdingTree, SplitEvent, TreeConfig};
pub use types::{ClassLabel, ObservedLabel, StreamRecord};
