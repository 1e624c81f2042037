//! Sequential reference checks. Slow and simple on purpose: these are the
//! ground truth the parallel code is tested against.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::aggregate::{KeyedResult, Reducer};
use crate::key::KeyAdapter;

/// Assigns dense ids to keys by first lookup, using the adapter's hash and
/// equality.
pub struct KeyIds<'a, A, K> {
    adapter: &'a A,
    by_hash: BTreeMap<u64, Vec<(K, usize)>>,
    next: usize,
}

impl<'a, A, K: Copy> KeyIds<'a, A, K> {
    pub fn new(adapter: &'a A) -> Self {
        Self { adapter, by_hash: BTreeMap::new(), next: 0 }
    }

    pub fn len(&self) -> usize {
        self.next
    }

    pub fn is_empty(&self) -> bool {
        self.next == 0
    }

    pub fn id<R>(&mut self, key: K) -> usize
    where
        A: KeyAdapter<R, Key = K>,
    {
        let bucket = self.by_hash.entry(self.adapter.hash(&key)).or_default();
        if let Some(&(_, id)) = bucket.iter().find(|(k, _)| self.adapter.eq(k, &key)) {
            return id;
        }
        let id = self.next;
        self.next += 1;
        bucket.push((key, id));
        id
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub is_permutation: bool,
    pub is_contiguous: bool,
    pub is_stable: bool,
    /// Output index and description of the first problem found.
    pub first_violation: Option<(usize, &'static str)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.is_permutation && self.is_contiguous && self.is_stable
    }
}

/// Check that `output` is a stable semisort of `input`.
pub fn validate_semisort<R, A>(input: &[R], output: &[R], adapter: &A) -> ValidationReport
where
    R: Ord + Copy,
    A: KeyAdapter<R>,
{
    let mut report = ValidationReport { is_permutation: true, is_contiguous: true, is_stable: true, first_violation: None };
    let note = |r: &mut ValidationReport, at: usize, what: &'static str| {
        if r.first_violation.is_none() {
            r.first_violation = Some((at, what));
        }
    };

    if input.len() != output.len() {
        report.is_permutation = false;
        report.is_stable = false;
        note(&mut report, input.len().min(output.len()), "length differs");
    } else {
        let mut a = input.to_vec();
        let mut b = output.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if let Some(i) = a.iter().zip(&b).position(|(x, y)| x != y) {
            report.is_permutation = false;
            note(&mut report, i, "record multiset differs (index in sorted order)");
        }
    }

    let mut ids = KeyIds::new(adapter);
    let mut per_key_input: Vec<Vec<R>> = Vec::new();
    for r in input {
        let id = ids.id(adapter.key(r));
        if id == per_key_input.len() {
            per_key_input.push(Vec::new());
        }
        per_key_input[id].push(*r);
    }

    let mut finished: Vec<bool> = vec![false; per_key_input.len()];
    let mut taken: Vec<usize> = vec![0; per_key_input.len()];
    let mut current: Option<usize> = None;
    for (i, r) in output.iter().enumerate() {
        let id = ids.id(adapter.key(r));
        if id >= finished.len() {
            finished.resize(id + 1, false);
            taken.resize(id + 1, 0);
            per_key_input.resize(id + 1, Vec::new());
        }
        if current != Some(id) {
            if let Some(prev) = current {
                finished[prev] = true;
            }
            if finished[id] {
                report.is_contiguous = false;
                note(&mut report, i, "key run split");
            }
            current = Some(id);
        }
        let k = taken[id];
        taken[id] += 1;
        if per_key_input[id].get(k) != Some(r) {
            report.is_stable = false;
            note(&mut report, i, "equal-key records out of input order");
        }
    }
    report
}

/// Per-key left fold in input order. Keys are listed by first occurrence.
pub fn oracle_collect_reduce<R, A, F>(input: &[R], adapter: &A, reducer: &F) -> KeyedResult<A::Key, F::Value>
where
    A: KeyAdapter<R>,
    F: Reducer<R>,
{
    let mut ids = KeyIds::new(adapter);
    let mut pairs: Vec<(A::Key, F::Value)> = Vec::new();
    for r in input {
        let k = adapter.key(r);
        let id = ids.id(k);
        if id == pairs.len() {
            pairs.push((k, reducer.identity()));
        }
        reducer.combine(&mut pairs[id].1, reducer.map(r));
    }
    KeyedResult { pairs }
}

/// Order-insensitive equality of two keyed results.
pub fn multiset_equal<R, A, V>(a: &KeyedResult<A::Key, V>, b: &KeyedResult<A::Key, V>, adapter: &A) -> bool
where
    A: KeyAdapter<R>,
    V: PartialEq,
{
    if a.pairs.len() != b.pairs.len() {
        return false;
    }
    let mut ids = KeyIds::new(adapter);
    let mut left: Vec<Vec<&V>> = Vec::new();
    for (k, v) in &a.pairs {
        let id = ids.id(*k);
        if id == left.len() {
            left.push(Vec::new());
        }
        left[id].push(v);
    }
    for (k, v) in &b.pairs {
        let id = ids.id(*k);
        let Some(vals) = left.get_mut(id) else { return false };
        match vals.iter().position(|x| *x == v) {
            Some(p) => {
                vals.swap_remove(p);
            }
            None => return false,
        }
    }
    left.iter().all(|v| v.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{Count, ReduceFn};
    use crate::key::IntKey;
    use crate::record::Record;
    use alloc::string::String;

    fn tagged(keys: &[u64]) -> Vec<Record<u64, u64>> {
        keys.iter().enumerate().map(|(i, &k)| Record::new(k, i as u64)).collect()
    }

    #[test]
    fn validator_examples() {
        let input = tagged(&[2, 1, 2]);
        let good = vec![input[1], input[0], input[2]];
        assert!(validate_semisort(&input, &good, &IntKey::HASHED).is_valid());

        let split = input.clone();
        let r = validate_semisort(&input, &split, &IntKey::HASHED);
        assert!(r.is_permutation && !r.is_contiguous);
        assert_eq!(r.first_violation, Some((2, "key run split")));

        let swapped = vec![input[1], input[2], input[0]];
        let r = validate_semisort(&input, &swapped, &IntKey::HASHED);
        assert!(r.is_permutation && r.is_contiguous && !r.is_stable);

        let lost = vec![input[1], input[0], input[0]];
        assert!(!validate_semisort(&input, &lost, &IntKey::HASHED).is_permutation);
    }

    #[test]
    fn stable_sort_always_validates() {
        let mut rng = crate::rng::CounterRng::new(8);
        for len in [0usize, 1, 5, 100, 1000] {
            let input: Vec<Record<u64, u64>> = (0..len as u64).map(|i| Record::new(rng.below(20), i)).collect();
            let mut out = input.clone();
            out.sort_by_key(|r| r.key);
            assert!(validate_semisort(&input, &out, &IntKey::HASHED).is_valid());
        }
    }

    #[test]
    fn oracle_reduce_examples() {
        let concat = ReduceFn::new(String::new(), |r: &Record<char, char>| String::from(r.value), |a: &mut String, b: String| a.push_str(&b));
        struct CharKey;
        impl KeyAdapter<Record<char, char>> for CharKey {
            type Key = char;
            fn key(&self, r: &Record<char, char>) -> char {
                r.key
            }
            fn hash(&self, k: &char) -> u64 {
                *k as u64
            }
            fn eq(&self, a: &char, b: &char) -> bool {
                a == b
            }
        }
        let empty: Vec<Record<char, char>> = vec![];
        assert!(oracle_collect_reduce(&empty, &CharKey, &concat).pairs.is_empty());
        let input = vec![Record::new('x', 'a'), Record::new('y', 'b'), Record::new('x', 'c')];
        let out = oracle_collect_reduce(&input, &CharKey, &concat);
        assert_eq!(out.pairs, vec![('x', String::from("ac")), ('y', String::from("b"))]);

        let counts = oracle_collect_reduce(&[3u64, 1, 3, 3], &IntKey::HASHED, &Count);
        assert_eq!(counts.pairs, vec![(3, 3), (1, 1)]);
    }

    #[test]
    fn multiset_examples() {
        let a = KeyedResult { pairs: vec![(1u64, 2u64), (3, 4)] };
        let b = KeyedResult { pairs: vec![(3u64, 4u64), (1, 2)] };
        assert!(multiset_equal::<u64, _, _>(&a, &b, &IntKey::HASHED));
        let e: KeyedResult<u64, u64> = KeyedResult { pairs: vec![] };
        assert!(multiset_equal::<u64, _, _>(&e, &e, &IntKey::HASHED));
        let c = KeyedResult { pairs: vec![(3u64, 5u64), (1, 2)] };
        assert!(!multiset_equal::<u64, _, _>(&a, &c, &IntKey::HASHED));
    }
}
