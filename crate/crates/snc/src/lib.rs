//! File formats, experiment harness and command line for the
//! Steadiness & Cohesiveness metrics in [`snc_core`].

pub mod experiments;
pub mod export;
pub mod io;
pub mod regression;
pub mod report;
pub mod selftest;
pub mod threads;

pub use export::{export_reliability_map, ReliabilityMapDocument};
pub use io::{read_labels, read_matrix, read_json, write_json, IoError};
pub use report::ScoresDocument;
