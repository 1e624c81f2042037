//! Sequential base cases.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::mem::MaybeUninit;

use crate::hash::slot;
use crate::key::KeyAdapter;
use crate::plan::as_uninit;

const NIL: u32 = u32::MAX;

struct Group<K> {
    hash: u64,
    key: K,
    head: u32,
    tail: u32,
    next: u32,
}

/// Stable grouping through a chained hash table.
///
/// The table has the smallest power-of-two capacity of at least
/// `2 * src.len()` cells. Each cell chains the distinct keys hashed to it, and
/// each key chains its records in encounter order. Packing walks cells in
/// index order, keys in insertion order and records in chain order, writing
/// all of `dst`.
pub fn group_into<R, A>(src: &[R], dst: &mut [MaybeUninit<R>], adapter: &A)
where
    R: Copy,
    A: KeyAdapter<R>,
{
    assert_eq!(src.len(), dst.len());
    let n = src.len();
    if n == 0 {
        return;
    }
    assert!(n < NIL as usize, "base case too large for 32-bit links");
    let cap = (2 * n).next_power_of_two();
    let bits = cap.trailing_zeros();
    let mut cells = vec![NIL; cap];
    let mut groups: Vec<Group<A::Key>> = Vec::new();
    let mut next = vec![NIL; n];
    for (i, r) in src.iter().enumerate() {
        let k = adapter.key(r);
        let h = adapter.hash(&k);
        let s = slot(h, bits);
        let mut g = cells[s];
        let mut last = NIL;
        while g != NIL {
            let grp = &mut groups[g as usize];
            if grp.hash == h && adapter.eq(&grp.key, &k) {
                next[grp.tail as usize] = i as u32;
                grp.tail = i as u32;
                break;
            }
            last = g;
            g = grp.next;
        }
        if g == NIL {
            let id = groups.len() as u32;
            groups.push(Group { hash: h, key: k, head: i as u32, tail: i as u32, next: NIL });
            if last == NIL {
                cells[s] = id;
            } else {
                groups[last as usize].next = id;
            }
        }
    }
    let mut out = 0;
    for &c in &cells {
        let mut g = c;
        while g != NIL {
            let grp = &groups[g as usize];
            let mut r = grp.head;
            while r != NIL {
                dst[out].write(src[r as usize]);
                out += 1;
                r = next[r as usize];
            }
            g = grp.next;
        }
    }
    debug_assert_eq!(out, n);
}

/// Equality-only base case on a single slice. Allocates a temporary copy.
pub fn base_case_eq<R, A>(slice: &mut [R], adapter: &A)
where
    R: Copy,
    A: KeyAdapter<R>,
{
    let src = slice.to_vec();
    group_into(&src, as_uninit(slice), adapter);
}

/// Comparison base case: a stable sort by key.
pub fn base_case_lt<R, A>(slice: &mut [R], adapter: &A)
where
    A: KeyAdapter<R>,
{
    slice.sort_by(|a, b| {
        let (ka, kb) = (adapter.key(a), adapter.key(b));
        if adapter.less(&ka, &kb) {
            Ordering::Less
        } else if adapter.less(&kb, &ka) {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::IntKey;
    use crate::oracle::validate_semisort;
    use crate::record::Record;

    fn recs(keys: &[u64]) -> Vec<Record<u64, u64>> {
        keys.iter().enumerate().map(|(i, &k)| Record::new(k, i as u64)).collect()
    }

    #[test]
    fn eq_base_case_examples() {
        let mut empty: Vec<Record<u64, u64>> = Vec::new();
        base_case_eq(&mut empty, &IntKey::HASHED);
        assert!(empty.is_empty());

        let input = recs(&[5, 5, 5]);
        let mut v = input.clone();
        base_case_eq(&mut v, &IntKey::HASHED);
        assert_eq!(v, input);

        let input = recs(&[2, 1, 2]);
        let mut v = input.clone();
        base_case_eq(&mut v, &IntKey::HASHED);
        assert!(validate_semisort(&input, &v, &IntKey::HASHED).is_valid());
    }

    #[test]
    fn eq_base_case_handles_colliding_low_bits() {
        // identity hashes sharing their low 12 bits
        let keys: Vec<u64> = (0..3000).map(|i| ((i * 7) % 50) << 12).collect();
        let input = recs(&keys);
        let mut v = input.clone();
        base_case_eq(&mut v, &IntKey::IDENTITY);
        assert!(validate_semisort(&input, &v, &IntKey::IDENTITY).is_valid());
    }

    #[test]
    fn lt_base_case_examples() {
        let mut v = recs(&[3, 1, 2]);
        base_case_lt(&mut v, &IntKey::HASHED);
        assert_eq!(v.iter().map(|r| r.key).collect::<Vec<_>>(), vec![1, 2, 3]);

        let input = vec![Record::new(1u64, 10u64), Record::new(1, 11)];
        let mut v = input.clone();
        base_case_lt(&mut v, &IntKey::HASHED);
        assert_eq!(v, input);
    }

    #[test]
    fn lt_base_case_matches_reference_stable_sort() {
        let mut rng = crate::rng::CounterRng::new(11);
        let input: Vec<Record<u64, u64>> = (0..1000).map(|i| Record::new(rng.below(50), i)).collect();
        let mut v = input.clone();
        base_case_lt(&mut v, &IntKey::HASHED);
        // insertion sort as the reference: stable by construction
        let mut reference = input.clone();
        for i in 1..reference.len() {
            let mut j = i;
            while j > 0 && reference[j - 1].key > reference[j].key {
                reference.swap(j - 1, j);
                j -= 1;
            }
        }
        assert_eq!(v, reference);
    }
}
