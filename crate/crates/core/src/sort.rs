//! The recursive semisort driver.

use alloc::vec::Vec;
use core::mem::MaybeUninit;

use crate::base::{base_case_lt, group_into};
use crate::error::Error;
use crate::exec::{par_copy, ForkJoin};
use crate::heavy::sample_heavy;
use crate::key::KeyAdapter;
use crate::metrics::{Metrics, SortReport};
use crate::params::{Resolved, TuningParams};
use crate::plan::{as_uninit, column_major_exclusive_scan, count_into_matrix, distribute, Classifier, LightSplit};
use crate::rng::{derive, CounterRng};

/// Base-case strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Equality only: base cases group through a chained hash table.
    Eq,
    /// Base cases use a stable comparison sort; requires an ordered adapter.
    Lt,
}

/// Recursion levels after which a subproblem is finished by a base case no
/// matter its size.
pub const MAX_DEPTH: usize = 48;

/// Stable semisort of `data` in place: afterwards records with equal keys are
/// contiguous and keep their input order.
///
/// The output depends only on the input and `params` (including the seed),
/// never on the executor.
pub fn semisort<E, R, A>(exec: &E, data: &mut [R], adapter: &A, mode: Mode, params: &TuningParams) -> Result<(), Error>
where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
    A: KeyAdapter<R>,
{
    let metrics = Metrics::new();
    semisort_with_metrics(exec, data, adapter, mode, params, &metrics)
}

/// [`semisort`] that also fills `metrics`.
pub fn semisort_with_metrics<E, R, A>(
    exec: &E,
    data: &mut [R],
    adapter: &A,
    mode: Mode,
    params: &TuningParams,
    metrics: &Metrics,
) -> Result<(), Error>
where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
    A: KeyAdapter<R>,
{
    if mode == Mode::Lt && !adapter.has_order() {
        return Err(Error::MissingOrder);
    }
    let n = data.len();
    let params = params.resolve(n)?;
    if n == 0 {
        return Ok(());
    }
    metrics.depth(1);
    if n == 1 {
        return Ok(());
    }
    let mut scratch: Vec<R> = Vec::new();
    scratch.try_reserve_exact(n).map_err(|_| Error::Allocation(n))?;
    Metrics::add(&metrics.scratch_allocations, 1);
    let mut ids: Vec<u16> = Vec::new();
    ids.try_reserve_exact(n).map_err(|_| Error::Allocation(n))?;
    ids.resize(n, 0);

    let ctx = Ctx { exec, adapter, mode, params: &params, metrics };
    let split = LightSplit::new(params.light_bits);
    if n < params.alpha {
        scratch.extend_from_slice(data);
        ctx.base_case(data, &mut scratch, true);
        return Ok(());
    }
    let light = ctx.bucketize(data, &mut ids, &mut scratch.spare_capacity_mut()[..n], split, params.seed, 1);
    let total = *light.last().unwrap();
    assert_eq!(total, n);
    // Safety: `bucketize` wrote each of the first n slots exactly once (the
    // exact-count scan covers 0..n with disjoint cursors).
    unsafe { scratch.set_len(n) };
    Metrics::add(&metrics.scratch_moves, n);
    ctx.refine(data, &mut scratch, &mut ids, false, &light, split, params.seed, 1, false);
    Ok(())
}

/// [`semisort`] returning the instrumentation report.
pub fn semisort_report<E, R, A>(
    exec: &E,
    data: &mut [R],
    adapter: &A,
    mode: Mode,
    params: &TuningParams,
) -> Result<SortReport, Error>
where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
    A: KeyAdapter<R>,
{
    let metrics = Metrics::new();
    semisort_with_metrics(exec, data, adapter, mode, params, &metrics)?;
    Ok(metrics.report())
}

struct Ctx<'a, E: ?Sized, A> {
    exec: &'a E,
    adapter: &'a A,
    mode: Mode,
    params: &'a Resolved,
    metrics: &'a Metrics,
}

impl<E, A> Ctx<'_, E, A>
where
    E: ForkJoin + ?Sized,
{
    /// Sample, count, scan and scatter `src` into `dst`. Returns the offsets
    /// of all buckets (`n_L + n_H + 1` entries); light buckets come first.
    fn bucketize<R>(
        &self,
        src: &[R],
        ids: &mut [u16],
        dst: &mut [MaybeUninit<R>],
        split: LightSplit,
        seed: u64,
        depth: usize,
    ) -> Vec<usize>
    where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
    {
        let p = self.params;
        let heavy = sample_heavy(src, self.adapter, p, &mut CounterRng::new(seed));
        let cols = p.light_buckets + heavy.len();
        let classifier = Classifier { adapter: self.adapter, heavy: &heavy, split };
        let mut c = count_into_matrix(self.exec, src, ids, p.subarray_len, cols, &|r: &R| {
            classifier.bucket_of(r) as u16
        });
        self.metrics.matrix(depth - 1, c.rows * c.cols);
        Metrics::add(&self.metrics.bucket_id_calls, src.len());
        let offsets = column_major_exclusive_scan(self.exec, &mut c);
        distribute(self.exec, src, ids, p.subarray_len, &mut c, dst);
        offsets
    }

    /// Finish a node whose records sit in buckets described by `offsets`,
    /// in `primary` if `live_in_primary`, else in `scratch`. Heavy buckets are
    /// final; light buckets recurse with the buffer roles swapped.
    #[allow(clippy::too_many_arguments)]
    fn refine<R>(
        &self,
        primary: &mut [R],
        scratch: &mut [R],
        ids: &mut [u16],
        live_in_primary: bool,
        offsets: &[usize],
        split: LightSplit,
        seed: u64,
        depth: usize,
        valve_used: bool,
    ) where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
    {
        let n = primary.len();
        let light = self.params.light_buckets;
        let heavy_start = offsets[light];
        let (p_light, p_heavy) = primary.split_at_mut(heavy_start);
        let (s_light, s_heavy) = scratch.split_at_mut(heavy_start);
        let node = Node { parent_len: n, split, seed, depth, valve_used, live_in_primary };
        self.exec.join(
            || {
                if !live_in_primary {
                    par_copy(self.exec, p_heavy, s_heavy);
                }
            },
            || self.light_buckets(p_light, s_light, &mut ids[..heavy_start], &offsets[..=light], 0, &node),
        );
    }

    fn light_buckets<R>(
        &self,
        primary: &mut [R],
        scratch: &mut [R],
        ids: &mut [u16],
        offsets: &[usize],
        first_bucket: usize,
        node: &Node,
    ) where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
    {
        let buckets = offsets.len() - 1;
        if buckets == 1 {
            self.child(primary, scratch, ids, first_bucket, node);
            return;
        }
        let mid = buckets / 2;
        let cut = offsets[mid] - offsets[0];
        let (p0, p1) = primary.split_at_mut(cut);
        let (s0, s1) = scratch.split_at_mut(cut);
        let (i0, i1) = ids.split_at_mut(cut);
        self.exec.join(
            || self.light_buckets(p0, s0, i0, &offsets[..=mid], first_bucket, node),
            || self.light_buckets(p1, s1, i1, &offsets[mid..], first_bucket + mid, node),
        );
    }

    fn child<R>(&self, primary: &mut [R], scratch: &mut [R], ids: &mut [u16], bucket: usize, node: &Node)
    where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
    {
        let len = primary.len();
        if len == 0 {
            return;
        }
        let depth = node.depth + 1;
        self.metrics.depth(depth);
        let mut split = node.split.child();
        let mut valve_used = node.valve_used;
        if len >= self.params.alpha && 2 * len > node.parent_len {
            if valve_used {
                Metrics::add(&self.metrics.valve_base_cases, 1);
                self.base_case(primary, scratch, node.live_in_primary);
                return;
            }
            Metrics::add(&self.metrics.valve_rehashes, 1);
            split = split.rehashed();
            valve_used = true;
        }
        self.solve(primary, scratch, ids, node.live_in_primary, split, derive(node.seed, bucket as u64), depth, valve_used);
    }

    #[allow(clippy::too_many_arguments)]
    fn solve<R>(
        &self,
        primary: &mut [R],
        scratch: &mut [R],
        ids: &mut [u16],
        live_in_primary: bool,
        split: LightSplit,
        seed: u64,
        depth: usize,
        valve_used: bool,
    ) where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
    {
        let n = primary.len();
        if n < self.params.alpha || depth > MAX_DEPTH {
            self.base_case(primary, scratch, live_in_primary);
            return;
        }
        let offsets = if live_in_primary {
            Metrics::add(&self.metrics.scratch_moves, n);
            self.bucketize(primary, ids, as_uninit(scratch), split, seed, depth)
        } else {
            self.bucketize(scratch, ids, as_uninit(primary), split, seed, depth)
        };
        self.refine(primary, scratch, ids, !live_in_primary, &offsets, split, seed, depth, valve_used);
    }

    /// Sequential finish; the result always lands in `primary`.
    fn base_case<R>(&self, primary: &mut [R], scratch: &mut [R], live_in_primary: bool)
    where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
    {
        Metrics::add(&self.metrics.base_cases, 1);
        match self.mode {
            Mode::Eq => {
                if live_in_primary {
                    scratch.copy_from_slice(primary);
                }
                group_into(scratch, as_uninit(primary), self.adapter);
            }
            Mode::Lt => {
                if !live_in_primary {
                    primary.copy_from_slice(scratch);
                }
                base_case_lt(primary, self.adapter);
            }
        }
    }
}

struct Node {
    parent_len: usize,
    split: LightSplit,
    seed: u64,
    depth: usize,
    valve_used: bool,
    live_in_primary: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::key::{EqOnly, IntKey};
    use crate::oracle::validate_semisort;
    use crate::record::Record;
    use alloc::vec;

    fn small_params() -> TuningParams {
        TuningParams { light_bits: 4, alpha: 64, subarray_len: Some(32), ..Default::default() }
    }

    #[test]
    fn empty_and_trivial_inputs() {
        let mut v: Vec<Record<u64, u64>> = vec![];
        semisort(&Sequential, &mut v, &IntKey::HASHED, Mode::Eq, &TuningParams::default()).unwrap();
        assert!(v.is_empty());
        let mut v = vec![Record::new(5u64, 0u64), Record::new(5, 1), Record::new(5, 2)];
        let orig = v.clone();
        semisort(&Sequential, &mut v, &IntKey::HASHED, Mode::Eq, &TuningParams::default()).unwrap();
        assert_eq!(v, orig);
    }

    #[test]
    fn two_key_example() {
        let input = vec![Record::new(2u64, 'a'), Record::new(1, 'b'), Record::new(2, 'c')];
        for mode in [Mode::Eq, Mode::Lt] {
            let mut v = input.clone();
            semisort(&Sequential, &mut v, &IntKey::HASHED, mode, &small_params()).unwrap();
            let pos_a = v.iter().position(|r| r.value == 'a').unwrap();
            assert_eq!(v[pos_a + 1], Record::new(2, 'c'));
        }
    }

    #[test]
    fn lt_mode_needs_an_order() {
        let mut v = vec![1u64, 2];
        let err = semisort(&Sequential, &mut v, &EqOnly(IntKey::HASHED), Mode::Lt, &TuningParams::default());
        assert_eq!(err, Err(Error::MissingOrder));
    }

    #[test]
    fn bad_params_surface_as_config_errors() {
        let mut v = vec![1u64, 2];
        let p = TuningParams { light_bits: 0, ..Default::default() };
        assert!(matches!(semisort(&Sequential, &mut v, &IntKey::HASHED, Mode::Eq, &p), Err(Error::Config(_))));
    }

    #[test]
    fn recursion_with_small_params_is_valid() {
        let mut rng = CounterRng::new(3);
        let input: Vec<Record<u64, u32>> = (0..20_000).map(|i| Record::new(rng.below(3000), i)).collect();
        for (adapter, mode) in [(IntKey::HASHED, Mode::Eq), (IntKey::IDENTITY, Mode::Eq), (IntKey::HASHED, Mode::Lt)] {
            let mut v = input.clone();
            let rep = semisort_report(&Sequential, &mut v, &adapter, mode, &small_params()).unwrap();
            assert!(validate_semisort(&input, &v, &adapter).is_valid());
            assert!(rep.max_depth >= 3, "{rep:?}");
            assert_eq!(rep.scratch_allocations, 1);
        }
    }

    #[test]
    fn all_heavy_input_never_recurses() {
        let mut v: Vec<Record<u64, u32>> = (0..100_000).map(|i| Record::new(77, i)).collect();
        let rep = semisort_report(&Sequential, &mut v, &IntKey::HASHED, Mode::Eq, &TuningParams::default()).unwrap();
        assert_eq!(rep.max_depth, 1);
        assert_eq!(rep.base_cases, 0);
        assert!(v.iter().enumerate().all(|(i, r)| r.value == i as u32));
    }

    #[test]
    fn small_input_goes_straight_to_base_case() {
        let mut v: Vec<u64> = (0..1000).map(|i| i % 7).collect();
        let rep = semisort_report(&Sequential, &mut v, &IntKey::HASHED, Mode::Eq, &TuningParams::default()).unwrap();
        assert_eq!(rep.max_depth, 1);
        assert_eq!(rep.base_cases, 1);
        assert_eq!(rep.bucket_id_calls, 0);
    }

    #[test]
    fn degenerate_identity_hash_hits_the_valve() {
        // keys are multiples of 2^40: every level's bit slice is zero until
        // the slices run past bit 40
        let input: Vec<Record<u64, u32>> = (0..5000u32).map(|i| Record::new(((i % 997) as u64) << 40, i)).collect();
        let mut v = input.clone();
        let p = TuningParams { light_bits: 4, alpha: 64, subarray_len: Some(32), max_heavy: 0, ..Default::default() };
        let rep = semisort_report(&Sequential, &mut v, &IntKey::IDENTITY, Mode::Eq, &p).unwrap();
        assert!(validate_semisort(&input, &v, &IntKey::IDENTITY).is_valid());
        assert!(rep.valve_rehashes >= 1, "{rep:?}");
    }

    #[test]
    fn constant_hash_terminates_through_valve_base_case() {
        struct Constant;
        impl KeyAdapter<Record<u64, u32>> for Constant {
            type Key = u64;
            fn key(&self, r: &Record<u64, u32>) -> u64 {
                r.key
            }
            fn hash(&self, _: &u64) -> u64 {
                42
            }
            fn eq(&self, a: &u64, b: &u64) -> bool {
                a == b
            }
        }
        let input: Vec<Record<u64, u32>> = (0..3000u32).map(|i| Record::new((i % 300) as u64, i)).collect();
        let mut v = input.clone();
        let p = TuningParams { light_bits: 4, alpha: 64, subarray_len: Some(32), max_heavy: 0, ..Default::default() };
        let rep = semisort_report(&Sequential, &mut v, &Constant, Mode::Eq, &p).unwrap();
        assert!(validate_semisort(&input, &v, &Constant).is_valid());
        assert_eq!(rep.valve_base_cases, 1, "{rep:?}");
    }
}
