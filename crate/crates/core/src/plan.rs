//! Exact-count blocked distribution: classification, the counting matrix,
//! its column-major exclusive scan and the stable scatter.

use alloc::vec;
use alloc::vec::Vec;
use core::mem::MaybeUninit;

use crate::exec::{for_each_mut, map_collect, ForkJoin, SharedMut};
use crate::hash::salted;
use crate::heavy::HeavyTable;
use crate::key::KeyAdapter;

/// Bucket id used for records that are not moved (heavy keys during
/// collect-reduce).
pub const SKIP: u16 = u16::MAX;

/// How light keys are split at one recursion node.
///
/// Level `d` uses hash bits `[d*b, d*b + b)`. Once the 64 hash bits are used
/// up the hash is remixed with a salt derived from the round, and the slices
/// start again from bit 0. `valve` perturbs the salt after a level failed to
/// shrink its input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LightSplit {
    pub bits: u32,
    pub level: u32,
    pub valve: u32,
}

impl LightSplit {
    pub const fn new(bits: u32) -> Self {
        Self { bits, level: 0, valve: 0 }
    }

    pub const fn child(self) -> Self {
        Self { level: self.level + 1, ..self }
    }

    /// Same level, different hash.
    pub const fn rehashed(self) -> Self {
        Self { valve: self.valve + 1, ..self }
    }

    #[inline]
    pub fn bucket(&self, hash: u64) -> usize {
        let per_round = 64 / self.bits;
        let round = self.level / per_round;
        let shift = (self.level % per_round) * self.bits;
        let h = if round == 0 && self.valve == 0 {
            hash
        } else {
            salted(hash, ((self.valve as u64) << 32) | round as u64)
        };
        ((h >> shift) & ((1u64 << self.bits) - 1)) as usize
    }
}

/// Maps records to bucket ids at one recursion node.
pub struct Classifier<'a, A, K> {
    pub adapter: &'a A,
    pub heavy: &'a HeavyTable<K>,
    pub split: LightSplit,
}

impl<A, K: Copy> Classifier<'_, A, K> {
    /// Heavy id in `[n_L, n_L + n_H)` if the key is heavy, otherwise the
    /// light id in `[0, n_L)`.
    #[inline]
    pub fn bucket_of<R>(&self, record: &R) -> usize
    where
        A: KeyAdapter<R, Key = K>,
    {
        let k = self.adapter.key(record);
        let h = self.adapter.hash(&k);
        match self.heavy.lookup(self.adapter, h, &k) {
            Some(id) => id,
            None => self.split.bucket(h),
        }
    }
}

/// Standalone bucket-id rule, as used by [`Classifier`].
pub fn get_bucket_id<R, A>(key: &A::Key, heavy: &HeavyTable<A::Key>, adapter: &A, split: LightSplit) -> usize
where
    A: KeyAdapter<R>,
{
    let h = adapter.hash(key);
    heavy.lookup(adapter, h, key).unwrap_or_else(|| split.bucket(h))
}

/// Row-major `rows x cols` matrix of counts (or, after the scan, offsets).
/// Row `i` is subarray `i`, column `j` is bucket `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<usize>,
}

impl CountMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, cells: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[&[usize]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            cells.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, cells }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn total(&self) -> usize {
        self.cells.iter().sum()
    }
}

/// Classify every record, caching its bucket id in `ids`, and count records
/// per (subarray, bucket). `classify` returns an id in `0..cols` or [`SKIP`].
/// `on_subarray` runs after each subarray with its index and records, for
/// callers that fold skipped records.
pub fn count_into_matrix<E, R, F>(
    exec: &E,
    data: &[R],
    ids: &mut [u16],
    subarray_len: usize,
    cols: usize,
    classify: &F,
) -> CountMatrix
where
    E: ForkJoin + ?Sized,
    R: Sync,
    F: Fn(&R) -> u16 + Sync,
{
    assert_eq!(data.len(), ids.len());
    let rows = data.len().div_ceil(subarray_len);
    let mut c = CountMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return c;
    }
    let mut tasks: Vec<(&mut [usize], &[R], &mut [u16])> = c
        .cells
        .chunks_mut(cols)
        .zip(data.chunks(subarray_len))
        .zip(ids.chunks_mut(subarray_len))
        .map(|((row, d), i)| (row, d, i))
        .collect();
    for_each_mut(exec, &mut tasks, &|_, (row, d, i)| {
        for (r, id) in d.iter().zip(i.iter_mut()) {
            let b = classify(r);
            *id = b;
            if b != SKIP {
                row[b as usize] += 1;
            }
        }
    });
    drop(tasks);
    c
}

const SCAN_BLOCK_ROWS: usize = 64;

/// Exclusive prefix sum of `c` in column-major order, in place:
/// `X[i][j] = sum of C[i'][j'] over j' < j, or j' = j and i' < i`.
///
/// Returns the bucket offsets: `offsets[j] = X[0][j]` and
/// `offsets[cols] = total`.
pub fn column_major_exclusive_scan<E>(exec: &E, c: &mut CountMatrix) -> Vec<usize>
where
    E: ForkJoin + ?Sized,
{
    let (rows, cols) = (c.rows, c.cols);
    if rows == 0 || cols == 0 {
        return vec![0; cols + 1];
    }
    let blocks = rows.div_ceil(SCAN_BLOCK_ROWS);
    let block_len = SCAN_BLOCK_ROWS * cols;
    let cells = &c.cells;
    let block_sums: Vec<Vec<usize>> = map_collect(exec, blocks, &|b| {
        let mut s = vec![0usize; cols];
        for row in cells[b * block_len..((b + 1) * block_len).min(cells.len())].chunks(cols) {
            for (acc, &x) in s.iter_mut().zip(row) {
                *acc += x;
            }
        }
        s
    });
    // column bases, then per-block starting cursors
    let mut offsets = Vec::with_capacity(cols + 1);
    let mut run = 0usize;
    for j in 0..cols {
        offsets.push(run);
        run += block_sums.iter().map(|s| s[j]).sum::<usize>();
    }
    offsets.push(run);
    let mut starts: Vec<Vec<usize>> = Vec::with_capacity(blocks);
    let mut cursor = offsets[..cols].to_vec();
    for s in &block_sums {
        starts.push(cursor.clone());
        for (c, x) in cursor.iter_mut().zip(s) {
            *c += x;
        }
    }
    let mut tasks: Vec<(&mut [usize], Vec<usize>)> = c.cells.chunks_mut(block_len).zip(starts).collect();
    for_each_mut(exec, &mut tasks, &|_, (block, cursor)| {
        for row in block.chunks_mut(cols) {
            for (x, c) in row.iter_mut().zip(cursor.iter_mut()) {
                let count = *x;
                *x = *c;
                *c += count;
            }
        }
    });
    offsets
}

/// Stable scatter of `data` into `dest` using the scanned matrix `x` as
/// per-subarray write cursors. Records whose id is [`SKIP`] are not moved.
/// The cursors in `x` are consumed.
///
/// Every destination slot receives exactly one record when the matrix was
/// built from the same `ids`; each subarray owns a disjoint set of slots.
pub fn distribute<E, R>(
    exec: &E,
    data: &[R],
    ids: &[u16],
    subarray_len: usize,
    x: &mut CountMatrix,
    dest: &mut [MaybeUninit<R>],
) where
    E: ForkJoin + ?Sized,
    R: Copy + Send + Sync,
{
    assert_eq!(data.len(), ids.len());
    let cols = x.cols;
    if data.is_empty() || cols == 0 {
        return;
    }
    let len = dest.len();
    let out = SharedMut(dest.as_mut_ptr());
    let mut tasks: Vec<(&mut [usize], &[R], &[u16])> = x
        .cells
        .chunks_mut(cols)
        .zip(data.chunks(subarray_len))
        .zip(ids.chunks(subarray_len))
        .map(|((row, d), i)| (row, d, i))
        .collect();
    for_each_mut(exec, &mut tasks, &|_, (cursor, d, i)| {
        for (r, &id) in d.iter().zip(i.iter()) {
            if id == SKIP {
                continue;
            }
            let pos = &mut cursor[id as usize];
            assert!(*pos < len);
            // Safety: cursor ranges of different (subarray, bucket) pairs are
            // disjoint by construction of the exclusive scan, and `pos` is in
            // bounds.
            unsafe { out.ptr().add(*pos).write(MaybeUninit::new(*r)) };
            *pos += 1;
        }
    });
}

/// View an initialized slice as write-only storage.
pub(crate) fn as_uninit<R: Copy>(s: &mut [R]) -> &mut [MaybeUninit<R>] {
    // Safety: MaybeUninit<R> has R's layout; callers only store valid `R`s.
    unsafe { &mut *(s as *mut [R] as *mut [MaybeUninit<R>]) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn light_bucket_examples() {
        // hash 13 = 0b1101, b = 2
        let s = LightSplit::new(2);
        assert_eq!(s.bucket(13), 1);
        assert_eq!(s.child().bucket(13), 3);
        assert_eq!(s.child().child().bucket(13), 0);
    }

    #[test]
    fn light_bits_roll_over_to_salted_hash() {
        let s = LightSplit { bits: 10, level: 6, valve: 0 };
        // 6 levels of 10 bits consume 60 bits; level 6 starts a new round
        assert_eq!(s.bucket(0x3ff), (salted(0x3ff, 1) & 0x3ff) as usize);
        let v = LightSplit::new(10).rehashed();
        assert_ne!(v.bucket(12345), LightSplit::new(10).bucket(12345));
    }

    #[test]
    fn heavy_lookup_wins() {
        use crate::key::IntKey;
        let heavy = HeavyTable::from_keys::<u64, _>(&IntKey::IDENTITY, 4, &[13u64]);
        assert_eq!(get_bucket_id::<u64, _>(&13, &heavy, &IntKey::IDENTITY, LightSplit::new(2)), 4);
        assert_eq!(get_bucket_id::<u64, _>(&9, &heavy, &IntKey::IDENTITY, LightSplit::new(2)), 1);
    }

    fn ids_example() -> (Vec<u16>, CountMatrix) {
        let ids: Vec<u16> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let mut cache = vec![0u16; 8];
        let c = count_into_matrix(&Sequential, &ids, &mut cache, 4, 2, &|&b| b);
        assert_eq!(cache, ids);
        (ids, c)
    }

    #[test]
    fn counting_example() {
        let (_, c) = ids_example();
        assert_eq!(c, CountMatrix::from_rows(&[&[1, 3], &[3, 1]]));
    }

    #[test]
    fn scan_example() {
        let (_, mut c) = ids_example();
        let offsets = column_major_exclusive_scan(&Sequential, &mut c);
        assert_eq!(c, CountMatrix::from_rows(&[&[0, 4], &[1, 7]]));
        assert_eq!(offsets, vec![0, 4, 8]);
    }

    #[test]
    fn scan_edge_cases() {
        let mut z = CountMatrix::zeros(3, 4);
        assert_eq!(column_major_exclusive_scan(&Sequential, &mut z), vec![0; 5]);
        assert_eq!(z, CountMatrix::zeros(3, 4));
        let mut one = CountMatrix::from_rows(&[&[9]]);
        assert_eq!(column_major_exclusive_scan(&Sequential, &mut one), vec![0, 9]);
        assert_eq!(one.cells, vec![0]);
        let mut empty = CountMatrix::zeros(0, 3);
        assert_eq!(column_major_exclusive_scan(&Sequential, &mut empty), vec![0; 4]);
    }

    #[test]
    fn distribute_example_orders_by_subarray_then_position() {
        let (ids, mut c) = ids_example();
        column_major_exclusive_scan(&Sequential, &mut c);
        // record = its input position
        let data: Vec<usize> = (0..8).collect();
        let mut out = vec![usize::MAX; 8];
        distribute(&Sequential, &data, &ids, 4, &mut c, as_uninit(&mut out));
        assert_eq!(out, vec![1, 4, 5, 7, 0, 2, 3, 6]);
    }

    #[test]
    fn single_bucket_distribution_copies() {
        let data: Vec<u32> = (0..100).rev().collect();
        let mut ids = vec![0u16; 100];
        let mut c = count_into_matrix(&Sequential, &data, &mut ids, 7, 1, &|_| 0);
        let offsets = column_major_exclusive_scan(&Sequential, &mut c);
        assert_eq!(offsets, vec![0, 100]);
        let mut out = vec![0u32; 100];
        distribute(&Sequential, &data, &ids, 7, &mut c, as_uninit(&mut out));
        assert_eq!(out, data);
    }

    #[test]
    fn skipped_records_are_not_moved() {
        let data: Vec<u16> = vec![0, SKIP, 1, SKIP, 0];
        let mut ids = vec![0u16; 5];
        let mut c = count_into_matrix(&Sequential, &data, &mut ids, 2, 2, &|&b| b);
        assert_eq!(c.total(), 3);
        let offsets = column_major_exclusive_scan(&Sequential, &mut c);
        assert_eq!(offsets, vec![0, 2, 3]);
        let mut out = vec![9u16; 3];
        distribute(&Sequential, &data, &ids, 2, &mut c, as_uninit(&mut out));
        assert_eq!(out, vec![0, 0, 1]);
    }
}
