//! Std companion to `semisort-core`: a rayon-backed executor, synthetic
//! workloads and their statistics, record/graph file formats, the graph
//! transpose and n-gram applications, and the benchmark harness behind the
//! `semisort` binary.

pub mod apps;
pub mod bench;
pub mod datagen;
pub mod error;
pub mod format;
pub mod pool;
pub mod word;

pub use error::{Error, Result};
pub use pool::{with_threads, Rayon};
