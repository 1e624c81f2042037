//! Applications built on semisort: CSR graph transposition and n-gram
//! grouping.

pub mod graph;
pub mod ngram;
