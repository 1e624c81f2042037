//! Sampling for heavy keys and the heavy table.

use alloc::vec;
use alloc::vec::Vec;

use crate::hash::slot;
use crate::key::KeyAdapter;
use crate::params::Resolved;
use crate::rng::CounterRng;

/// Sequential open-addressed index from keys to dense entry numbers, in
/// insertion order. Sized up front for a known maximum entry count.
#[derive(Clone, Debug)]
pub(crate) struct KeyIndex<K> {
    bits: u32,
    slots: Vec<u32>,
    hashes: Vec<u64>,
    keys: Vec<K>,
}

impl<K: Copy> KeyIndex<K> {
    pub(crate) fn with_capacity(max_entries: usize) -> Self {
        let cap = (2 * max_entries).max(2).next_power_of_two();
        Self {
            bits: cap.trailing_zeros(),
            slots: vec![u32::MAX; cap],
            hashes: Vec::with_capacity(max_entries),
            keys: Vec::with_capacity(max_entries),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.keys.len()
    }

    pub(crate) fn keys(&self) -> &[K] {
        &self.keys
    }

    #[inline]
    pub(crate) fn find(&self, hash: u64, key: &K, eq: impl Fn(&K, &K) -> bool) -> Option<usize> {
        let mask = self.slots.len() - 1;
        let mut s = slot(hash, self.bits);
        loop {
            let e = self.slots[s];
            if e == u32::MAX {
                return None;
            }
            let e = e as usize;
            if self.hashes[e] == hash && eq(&self.keys[e], key) {
                return Some(e);
            }
            s = (s + 1) & mask;
        }
    }

    /// Entry number of `key`, inserting it if absent. Returns `(entry,
    /// inserted)`.
    pub(crate) fn find_or_insert(&mut self, hash: u64, key: K, eq: impl Fn(&K, &K) -> bool) -> (usize, bool) {
        let mask = self.slots.len() - 1;
        let mut s = slot(hash, self.bits);
        loop {
            let e = self.slots[s];
            if e == u32::MAX {
                let id = self.keys.len();
                debug_assert!(2 * id < self.slots.len(), "KeyIndex over capacity");
                self.slots[s] = id as u32;
                self.hashes.push(hash);
                self.keys.push(key);
                return (id, true);
            }
            let e = e as usize;
            if self.hashes[e] == hash && eq(&self.keys[e], &key) {
                return (e, false);
            }
            s = (s + 1) & mask;
        }
    }
}

/// Keys with a dedicated bucket. The `i`-th heavy key owns bucket
/// `first_id + i`.
#[derive(Clone, Debug)]
pub struct HeavyTable<K> {
    index: KeyIndex<K>,
    first_id: usize,
}

impl<K: Copy> HeavyTable<K> {
    pub fn empty(first_id: usize) -> Self {
        Self { index: KeyIndex::with_capacity(0), first_id }
    }

    /// Build a table from keys in bucket-id order.
    pub fn from_keys<R, A>(adapter: &A, first_id: usize, keys: &[K]) -> Self
    where
        A: KeyAdapter<R, Key = K>,
    {
        let mut index = KeyIndex::with_capacity(keys.len());
        for &k in keys {
            index.find_or_insert(adapter.hash(&k), k, |a, b| adapter.eq(a, b));
        }
        Self { index, first_id }
    }

    /// Number of heavy keys.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.len() == 0
    }

    pub fn first_id(&self) -> usize {
        self.first_id
    }

    /// Heavy keys in bucket-id order.
    pub fn keys(&self) -> &[K] {
        self.index.keys()
    }

    /// Bucket id of `key` if it is heavy.
    #[inline]
    pub fn lookup<R, A>(&self, adapter: &A, hash: u64, key: &K) -> Option<usize>
    where
        A: KeyAdapter<R, Key = K>,
    {
        if self.is_empty() {
            return None;
        }
        self.index.find(hash, key, |a, b| adapter.eq(a, b)).map(|e| self.first_id + e)
    }
}

/// Sample a subproblem and collect its heavy keys.
///
/// Draws `min(n', sample_factor * log2 n')` positions uniformly with
/// replacement, sequentially from `rng`. Keys seen at least
/// `ceil(log2 n)` times (top-level `n`) are heavy. When more than
/// `max_heavy` qualify, the most-sampled are kept, ties going to the key
/// that appeared first in the sample stream. Heavy ids follow first
/// appearance.
pub fn sample_heavy<R, A>(data: &[R], adapter: &A, params: &Resolved, rng: &mut CounterRng) -> HeavyTable<A::Key>
where
    A: KeyAdapter<R>,
{
    let first_id = params.light_buckets;
    let m = params.sample_count(data.len());
    if m == 0 || params.max_heavy == 0 {
        return HeavyTable::empty(first_id);
    }
    let mut seen = KeyIndex::with_capacity(m);
    let mut counts: Vec<usize> = Vec::with_capacity(m);
    for _ in 0..m {
        let r = &data[rng.below(data.len() as u64) as usize];
        let k = adapter.key(r);
        let (e, inserted) = seen.find_or_insert(adapter.hash(&k), k, |a, b| adapter.eq(a, b));
        if inserted {
            counts.push(1);
        } else {
            counts[e] += 1;
        }
    }
    // entry numbers are first-appearance ranks
    let mut picked: Vec<usize> = (0..counts.len()).filter(|&e| counts[e] >= params.heavy_threshold).collect();
    if picked.len() > params.max_heavy {
        picked.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        picked.truncate(params.max_heavy);
        picked.sort_unstable();
    }
    let keys: Vec<A::Key> = picked.iter().map(|&e| seen.keys()[e]).collect();
    HeavyTable::from_keys(adapter, first_id, &keys)
}
