pub mod cli;
pub mod copies;
pub mod error;
pub mod estimator;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod moments;
pub mod motif;
pub mod stats;

pub use copies::{enumerate_copies, motif_count, CopyList};
pub use error::{Error, Result};
pub use graph::Graph;
pub use motif::Motif;
