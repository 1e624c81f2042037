//! Histogram and collect-reduce.
//!
//! Heavy keys are folded where they lie: each subarray keeps one partial
//! aggregate per heavy key, and partials are combined in subarray order.
//! Only light records are distributed; light buckets recurse and finish in a
//! hash table that combines on duplicate keys. Because every fold runs in
//! input order, `combine` only needs to be associative.
//!
//! Output order: a node emits its heavy keys in heavy-id order, then the
//! output of each light bucket in bucket order.

use alloc::vec::Vec;

use crate::error::Error;
use crate::exec::{for_each_mut, map_collect, ForkJoin};
use crate::heavy::{sample_heavy, KeyIndex};
use crate::key::KeyAdapter;
use crate::metrics::Metrics;
use crate::params::{Resolved, TuningParams};
use crate::plan::{column_major_exclusive_scan, distribute, CountMatrix, LightSplit, SKIP};
use crate::rng::{derive, CounterRng};
use crate::sort::MAX_DEPTH;

/// A map into an associative monoid.
pub trait Reducer<R>: Sync {
    type Value: Clone + Send + Sync;

    fn map(&self, record: &R) -> Self::Value;

    fn identity(&self) -> Self::Value;

    /// `acc <- acc (+) next`.
    fn combine(&self, acc: &mut Self::Value, next: Self::Value);
}

/// [`Reducer`] from closures.
#[derive(Clone, Debug)]
pub struct ReduceFn<V, M, C> {
    identity: V,
    map: M,
    combine: C,
}

impl<V, M, C> ReduceFn<V, M, C> {
    pub fn new(identity: V, map: M, combine: C) -> Self {
        Self { identity, map, combine }
    }
}

impl<R, V, M, C> Reducer<R> for ReduceFn<V, M, C>
where
    V: Clone + Send + Sync,
    M: Fn(&R) -> V + Sync,
    C: Fn(&mut V, V) + Sync,
{
    type Value = V;

    #[inline]
    fn map(&self, record: &R) -> V {
        (self.map)(record)
    }

    fn identity(&self) -> V {
        self.identity.clone()
    }

    #[inline]
    fn combine(&self, acc: &mut V, next: V) {
        (self.combine)(acc, next)
    }
}

/// Counts records: map to 1, combine with `+`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Count;

impl<R> Reducer<R> for Count {
    type Value = u64;

    #[inline]
    fn map(&self, _: &R) -> u64 {
        1
    }

    fn identity(&self) -> u64 {
        0
    }

    #[inline]
    fn combine(&self, acc: &mut u64, next: u64) {
        *acc += next;
    }
}

/// One `(key, aggregate)` pair per distinct key.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyedResult<K, V> {
    pub pairs: Vec<(K, V)>,
}

impl<K, V> KeyedResult<K, V> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Fold `reducer` over the records of every distinct key, in input order.
pub fn collect_reduce<E, R, A, F>(
    exec: &E,
    data: &[R],
    adapter: &A,
    reducer: &F,
    params: &TuningParams,
) -> Result<KeyedResult<A::Key, F::Value>, Error>
where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
    A: KeyAdapter<R>,
    F: Reducer<R>,
{
    collect_reduce_with_metrics(exec, data, adapter, reducer, params, &Metrics::new())
}

pub fn collect_reduce_with_metrics<E, R, A, F>(
    exec: &E,
    data: &[R],
    adapter: &A,
    reducer: &F,
    params: &TuningParams,
    metrics: &Metrics,
) -> Result<KeyedResult<A::Key, F::Value>, Error>
where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
    A: KeyAdapter<R>,
    F: Reducer<R>,
{
    let params = params.resolve(data.len())?;
    if data.is_empty() {
        return Ok(KeyedResult { pairs: Vec::new() });
    }
    let ctx = Ctx { exec, adapter, reducer, params: &params, metrics };
    let pairs = ctx.solve(data, LightSplit::new(params.light_bits), params.seed, 1, data.len(), false);
    Ok(KeyedResult { pairs })
}

/// Multiplicity of every distinct key.
pub fn histogram<E, R, A>(exec: &E, data: &[R], adapter: &A, params: &TuningParams) -> Result<KeyedResult<A::Key, u64>, Error>
where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
    A: KeyAdapter<R>,
{
    collect_reduce(exec, data, adapter, &Count, params)
}

struct Ctx<'a, E: ?Sized, A, F> {
    exec: &'a E,
    adapter: &'a A,
    reducer: &'a F,
    params: &'a Resolved,
    metrics: &'a Metrics,
}

type Pairs<K, V> = Vec<(K, V)>;

type CountTask<'a, R, V> = (&'a mut [usize], &'a [R], &'a mut [u16], &'a mut [Option<V>]);

impl<E, A, F> Ctx<'_, E, A, F>
where
    E: ForkJoin + ?Sized,
{
    fn solve<R>(&self, data: &[R], split: LightSplit, seed: u64, depth: usize, parent_len: usize, valve_used: bool) -> Pairs<A::Key, F::Value>
    where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
        F: Reducer<R>,
    {
        self.metrics.depth(depth);
        let n = data.len();
        let p = self.params;
        if n < p.alpha || depth > MAX_DEPTH {
            return self.base_case(data);
        }
        let (split, valve_used) = if depth > 1 && 2 * n > parent_len {
            if valve_used {
                Metrics::add(&self.metrics.valve_base_cases, 1);
                return self.base_case(data);
            }
            Metrics::add(&self.metrics.valve_rehashes, 1);
            (split.rehashed(), true)
        } else {
            (split, valve_used)
        };

        let heavy = sample_heavy(data, self.adapter, p, &mut CounterRng::new(seed));
        let n_heavy = heavy.len();
        let light = p.light_buckets;
        let rows = p.subarrays(n);
        let mut c = CountMatrix::zeros(rows, light);
        self.metrics.matrix(depth - 1, rows * light);
        Metrics::add(&self.metrics.bucket_id_calls, n);
        let mut ids: Vec<u16> = alloc::vec![0; n];
        let mut partials: Vec<Option<F::Value>> = alloc::vec![None; rows * n_heavy];

        // classify, count light records, fold heavy ones per subarray
        {
            let mut tasks: Vec<CountTask<'_, R, F::Value>> = c
                .cells
                .chunks_mut(light)
                .zip(data.chunks(p.subarray_len))
                .zip(ids.chunks_mut(p.subarray_len))
                .zip(partials_rows(&mut partials, rows, n_heavy))
                .map(|(((row, d), i), part)| (row, d, i, part))
                .collect();
            for_each_mut(self.exec, &mut tasks, &|_, (row, d, i, part)| {
                for (r, id) in d.iter().zip(i.iter_mut()) {
                    let k = self.adapter.key(r);
                    let h = self.adapter.hash(&k);
                    match heavy.lookup(self.adapter, h, &k) {
                        Some(b) => {
                            *id = SKIP;
                            let v = self.reducer.map(r);
                            match &mut part[b - light] {
                                Some(acc) => self.reducer.combine(acc, v),
                                slot => *slot = Some(v),
                            }
                        }
                        None => {
                            let b = split.bucket(h);
                            *id = b as u16;
                            row[b] += 1;
                        }
                    }
                }
            });
        }

        let heavy_pairs: Pairs<A::Key, F::Value> = map_collect(self.exec, n_heavy, &|h| {
            let mut acc = self.reducer.identity();
            for row in 0..rows {
                if let Some(v) = &partials[row * n_heavy + h] {
                    self.reducer.combine(&mut acc, v.clone());
                }
            }
            (heavy.keys()[h], acc)
        });
        drop(partials);

        let offsets = column_major_exclusive_scan(self.exec, &mut c);
        let n_light = offsets[light];
        if n_light == 0 {
            return heavy_pairs;
        }
        let mut moved: Vec<R> = Vec::with_capacity(n_light);
        distribute(self.exec, data, &ids, p.subarray_len, &mut c, &mut moved.spare_capacity_mut()[..n_light]);
        // Safety: the light columns of the scan cover 0..n_light exactly once.
        unsafe { moved.set_len(n_light) };
        drop(ids);
        Metrics::add(&self.metrics.scratch_allocations, 1);
        Metrics::add(&self.metrics.scratch_moves, n_light);

        let mut out = heavy_pairs;
        let mut rest = self.buckets(&moved, &offsets, 0, split.child(), seed, depth + 1, n, valve_used);
        out.append(&mut rest);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn buckets<R>(
        &self,
        moved: &[R],
        offsets: &[usize],
        first: usize,
        split: LightSplit,
        seed: u64,
        depth: usize,
        parent_len: usize,
        valve_used: bool,
    ) -> Pairs<A::Key, F::Value>
    where
        R: Copy + Send + Sync,
        A: KeyAdapter<R>,
        F: Reducer<R>,
    {
        let count = offsets.len() - 1;
        if count == 1 {
            let part = &moved[offsets[0]..offsets[1]];
            if part.is_empty() {
                return Vec::new();
            }
            return self.solve(part, split, derive(seed, first as u64), depth, parent_len, valve_used);
        }
        let mid = count / 2;
        let (mut a, mut b) = self.exec.join(
            || self.buckets(moved, &offsets[..=mid], first, split, seed, depth, parent_len, valve_used),
            || self.buckets(moved, &offsets[mid..], first + mid, split, seed, depth, parent_len, valve_used),
        );
        a.append(&mut b);
        a
    }

    /// Hash-table fold; keys come out in first-occurrence order.
    fn base_case<R>(&self, data: &[R]) -> Pairs<A::Key, F::Value>
    where
        A: KeyAdapter<R>,
        F: Reducer<R>,
    {
        Metrics::add(&self.metrics.base_cases, 1);
        let mut index = KeyIndex::with_capacity(data.len());
        let mut values: Vec<F::Value> = Vec::new();
        for r in data {
            let k = self.adapter.key(r);
            let (e, inserted) = index.find_or_insert(self.adapter.hash(&k), k, |a, b| self.adapter.eq(a, b));
            let v = self.reducer.map(r);
            if inserted {
                let mut acc = self.reducer.identity();
                self.reducer.combine(&mut acc, v);
                values.push(acc);
            } else {
                self.reducer.combine(&mut values[e], v);
            }
        }
        index.keys().iter().copied().zip(values).collect()
    }
}

/// `rows` mutable rows of `width` partials; empty rows when `width == 0`.
fn partials_rows<V>(partials: &mut [V], rows: usize, width: usize) -> Vec<&mut [V]> {
    if width == 0 {
        let mut v = Vec::with_capacity(rows);
        v.resize_with(rows, || &mut [][..]);
        v
    } else {
        partials.chunks_mut(width).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::key::IntKey;
    use crate::oracle::{multiset_equal, oracle_collect_reduce};
    use crate::record::Record;
    use alloc::string::String;
    use alloc::vec;

    fn concat() -> impl Reducer<Record<u64, char>, Value = String> {
        ReduceFn::new(String::new(), |r: &Record<u64, char>| String::from(r.value), |a: &mut String, b: String| {
            a.push_str(&b)
        })
    }

    #[test]
    fn concatenation_keeps_input_order() {
        let input = vec![Record::new(1u64, 'a'), Record::new(2, 'b'), Record::new(1, 'c')];
        let out = collect_reduce(&Sequential, &input, &IntKey::HASHED, &concat(), &TuningParams::default()).unwrap();
        let mut pairs = out.pairs.clone();
        pairs.sort();
        assert_eq!(pairs, vec![(1, String::from("ac")), (2, String::from("b"))]);
    }

    #[test]
    fn histogram_examples() {
        let p = TuningParams::default();
        assert!(histogram(&Sequential, &[] as &[u64], &IntKey::HASHED, &p).unwrap().is_empty());
        assert_eq!(histogram(&Sequential, &[7u64, 7, 7], &IntKey::HASHED, &p).unwrap().pairs, vec![(7, 3)]);
        let mut h = histogram(&Sequential, &[2u64, 1, 2, 3], &IntKey::HASHED, &p).unwrap().pairs;
        h.sort();
        assert_eq!(h, vec![(1, 1), (2, 2), (3, 1)]);
    }

    #[test]
    fn zero_values_sum_to_zero() {
        let data: Vec<Record<u64, u64>> = (0..50_000).map(|i| Record::new(i % 300, 0)).collect();
        let sum = ReduceFn::new(0u64, |r: &Record<u64, u64>| r.value, |a: &mut u64, b| *a += b);
        let out = collect_reduce(&Sequential, &data, &IntKey::HASHED, &sum, &TuningParams::default()).unwrap();
        assert_eq!(out.len(), 300);
        assert!(out.pairs.iter().all(|(_, v)| *v == 0));
    }

    #[test]
    fn recursive_concat_matches_oracle() {
        let mut rng = CounterRng::new(21);
        let chars = ['a', 'b', 'c', 'd'];
        // a few heavy keys plus many light ones
        let input: Vec<Record<u64, char>> = (0..30_000)
            .map(|_| {
                let k = if rng.below(3) == 0 { rng.below(4) } else { 100 + rng.below(5000) };
                Record::new(k, chars[rng.below(4) as usize])
            })
            .collect();
        let p = TuningParams { light_bits: 4, alpha: 256, subarray_len: Some(64), ..Default::default() };
        let metrics = Metrics::new();
        let out = collect_reduce_with_metrics(&Sequential, &input, &IntKey::HASHED, &concat(), &p, &metrics).unwrap();
        let expect = oracle_collect_reduce(&input, &IntKey::HASHED, &concat());
        assert!(multiset_equal::<Record<u64, char>, _, _>(&out, &expect, &IntKey::HASHED));
        assert!(metrics.report().max_depth >= 2);
    }

    #[test]
    fn all_heavy_input_moves_nothing() {
        let data = vec![9u64; 200_000];
        let metrics = Metrics::new();
        let out = collect_reduce_with_metrics(&Sequential, &data, &IntKey::HASHED, &Count, &TuningParams::default(), &metrics)
            .unwrap();
        assert_eq!(out.pairs, vec![(9, 200_000)]);
        let rep = metrics.report();
        assert_eq!(rep.scratch_moves, 0);
        assert_eq!(rep.scratch_allocations, 0);
    }
}
