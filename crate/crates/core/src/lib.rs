//! Parallel semisort and group-by primitives.
//!
//! A semisort reorders records so that records with equal keys end up next to
//! each other, without paying for a total order on keys. This crate
//! implements a sampling-based heavy/light bucketing scheme:
//!
//! 1. a sequential sample identifies *heavy* keys, each of which receives a
//!    dedicated bucket; every other key is *light* and is bucketed by a slice
//!    of its hash bits;
//! 2. the input is cut into fixed-length subarrays, an exact per-subarray
//!    bucket count is taken, and a column-major exclusive scan of the counting
//!    matrix gives every subarray a private write cursor per bucket, so
//!    records are distributed stably and without write conflicts;
//! 3. light buckets are refined recursively until they drop below a base-case
//!    threshold, where a chained hash table (equality only) or a stable
//!    comparison sort finishes the job.
//!
//! The same machinery drives [`collect_reduce`] and [`histogram`], which fold
//! heavy keys per subarray instead of moving them.
//!
//! The crate is `no_std` (it needs `alloc`). Parallelism is supplied by the
//! caller through the [`ForkJoin`] trait; [`Sequential`] runs everything on
//! the calling thread and produces exactly the same output as any parallel
//! executor.

#![no_std]
#![forbid(unsafe_op_in_unsafe_fn)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod base;
pub mod error;
pub mod exec;
pub mod hash;
pub mod heavy;
pub mod key;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod plan;
pub mod record;
pub mod rng;
pub mod sort;

pub use aggregate::{collect_reduce, collect_reduce_with_metrics, histogram, Count, KeyedResult, ReduceFn, Reducer};
pub use error::Error;
pub use exec::{ForkJoin, Sequential};
pub use key::{IntKey, KeyAdapter, KeyBits};
pub use metrics::{Metrics, SortReport};
pub use params::TuningParams;
pub use record::Record;
pub use sort::{semisort, semisort_with_metrics, Mode};
