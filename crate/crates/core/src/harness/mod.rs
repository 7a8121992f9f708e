//! Stream construction and prequential evaluation.

pub mod dataset;
pub mod grid;
pub mod prequential;
pub mod stream;

pub use dataset::{convert_to_binary, scan_csv, Dataset, ValidationReport};
pub use grid::{run_grid, GridSpec, RunKey, RunOutcome, RunRecord};
pub use prequential::{evaluate, pretrained_tree, run_prequential, RunResult};
pub use stream::{build_stream, Stream, StreamSpec};
