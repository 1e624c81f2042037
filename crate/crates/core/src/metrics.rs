//! Instrumentation counters filled in by every top-level call.

use core::sync::atomic::{AtomicUsize, Ordering::Relaxed};

/// Thread-safe counters. Updated once per subarray or per node, never per
/// record, so they stay cheap.
#[derive(Debug, Default)]
pub struct Metrics {
    pub(crate) max_depth: AtomicUsize,
    pub(crate) bucket_id_calls: AtomicUsize,
    pub(crate) scratch_allocations: AtomicUsize,
    pub(crate) scratch_moves: AtomicUsize,
    pub(crate) base_cases: AtomicUsize,
    pub(crate) valve_rehashes: AtomicUsize,
    pub(crate) valve_base_cases: AtomicUsize,
    pub(crate) matrix_counters: [AtomicUsize; MAX_LEVELS],
}

/// Levels tracked individually for matrix accounting; deeper levels share
/// the last slot.
pub const MAX_LEVELS: usize = 16;

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn depth(&self, d: usize) {
        self.max_depth.fetch_max(d, Relaxed);
    }

    pub(crate) fn add(counter: &AtomicUsize, n: usize) {
        if n > 0 {
            counter.fetch_add(n, Relaxed);
        }
    }

    pub(crate) fn matrix(&self, level: usize, counters: usize) {
        Self::add(&self.matrix_counters[level.min(MAX_LEVELS - 1)], counters);
    }

    pub fn report(&self) -> SortReport {
        let mut matrix = [0usize; MAX_LEVELS];
        for (m, c) in matrix.iter_mut().zip(&self.matrix_counters) {
            *m = c.load(Relaxed);
        }
        SortReport {
            max_depth: self.max_depth.load(Relaxed),
            bucket_id_calls: self.bucket_id_calls.load(Relaxed),
            scratch_allocations: self.scratch_allocations.load(Relaxed),
            scratch_moves: self.scratch_moves.load(Relaxed),
            base_cases: self.base_cases.load(Relaxed),
            valve_rehashes: self.valve_rehashes.load(Relaxed),
            valve_base_cases: self.valve_base_cases.load(Relaxed),
            matrix_counters_per_level: matrix,
        }
    }
}

/// Snapshot of [`Metrics`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortReport {
    /// Deepest semisort invocation; the top-level call is depth 1.
    pub max_depth: usize,
    /// Records classified into buckets, summed over all levels.
    pub bucket_id_calls: usize,
    /// Record-sized scratch buffers allocated.
    pub scratch_allocations: usize,
    /// Records written into scratch by distribution passes.
    pub scratch_moves: usize,
    pub base_cases: usize,
    pub valve_rehashes: usize,
    pub valve_base_cases: usize,
    /// Counting-matrix cells allocated per recursion level (index 0 is the
    /// top level).
    pub matrix_counters_per_level: [usize; MAX_LEVELS],
}
