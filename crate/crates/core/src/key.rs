//! Key extraction, equality, optional ordering and hashing.

use crate::hash::mix64;
use crate::record::HasKey;

/// Everything the algorithm needs to know about keys.
///
/// `eq` is the ground truth; `hash` only routes records to buckets and table
/// slots, so it must satisfy `eq(a, b) => hash(a) == hash(b)` but may collide.
pub trait KeyAdapter<R>: Sync {
    type Key: Copy + Send + Sync;

    fn key(&self, record: &R) -> Self::Key;

    fn hash(&self, key: &Self::Key) -> u64;

    fn eq(&self, a: &Self::Key, b: &Self::Key) -> bool;

    /// Whether [`KeyAdapter::less`] is a strict total order consistent with
    /// `eq`. Comparison-mode semisort requires it.
    fn has_order(&self) -> bool {
        false
    }

    fn less(&self, _a: &Self::Key, _b: &Self::Key) -> bool {
        false
    }

    #[inline]
    fn hash_of(&self, record: &R) -> u64 {
        self.hash(&self.key(record))
    }
}

/// Fixed-width unsigned integer keys.
pub trait KeyBits: Copy + Ord + Send + Sync + core::fmt::Debug + 'static {
    const BITS: u32;
    /// The key itself, folded to 64 bits.
    fn to_u64(self) -> u64;
}

impl KeyBits for u32 {
    const BITS: u32 = 32;
    fn to_u64(self) -> u64 {
        self as u64
    }
}

impl KeyBits for u64 {
    const BITS: u32 = 64;
    fn to_u64(self) -> u64 {
        self
    }
}

impl KeyBits for u128 {
    const BITS: u32 = 128;
    fn to_u64(self) -> u64 {
        (self as u64) ^ ((self >> 64) as u64)
    }
}

/// Adapter for records with integer keys.
///
/// In identity mode the hash of a key is the key itself (128-bit keys fold
/// their halves together); otherwise keys go through a 64-bit mixer.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntKey {
    pub identity: bool,
}

impl IntKey {
    pub const HASHED: IntKey = IntKey { identity: false };
    pub const IDENTITY: IntKey = IntKey { identity: true };
}

impl<R> KeyAdapter<R> for IntKey
where
    R: HasKey,
    R::Key: KeyBits,
{
    type Key = R::Key;

    #[inline]
    fn key(&self, record: &R) -> R::Key {
        record.key()
    }

    #[inline]
    fn hash(&self, key: &R::Key) -> u64 {
        let k = key.to_u64();
        if self.identity {
            k
        } else {
            mix64(k)
        }
    }

    #[inline]
    fn eq(&self, a: &R::Key, b: &R::Key) -> bool {
        a == b
    }

    fn has_order(&self) -> bool {
        true
    }

    #[inline]
    fn less(&self, a: &R::Key, b: &R::Key) -> bool {
        a < b
    }
}

/// Adapter that drops the ordering of another adapter, for exercising the
/// equality-only paths.
#[derive(Clone, Copy, Debug, Default)]
pub struct EqOnly<A>(pub A);

impl<R, A: KeyAdapter<R>> KeyAdapter<R> for EqOnly<A> {
    type Key = A::Key;

    fn key(&self, record: &R) -> A::Key {
        self.0.key(record)
    }

    fn hash(&self, key: &A::Key) -> u64 {
        self.0.hash(key)
    }

    fn eq(&self, a: &A::Key, b: &A::Key) -> bool {
        self.0.eq(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Record;

    #[test]
    fn identity_mode_returns_the_key() {
        let r = Record::new(13u64, 0u64);
        assert_eq!(KeyAdapter::<Record<u64, u64>>::hash(&IntKey::IDENTITY, &r.key), 13);
        assert_ne!(KeyAdapter::<Record<u64, u64>>::hash(&IntKey::HASHED, &r.key), 13);
        let wide = (5u128 << 64) | 3;
        assert_eq!(KeyAdapter::<u128>::hash(&IntKey::IDENTITY, &wide), 6);
    }

    #[test]
    fn eq_only_hides_order() {
        let a = EqOnly(IntKey::HASHED);
        assert!(!KeyAdapter::<u32>::has_order(&a));
        assert!(KeyAdapter::<u32>::has_order(&IntKey::HASHED));
    }
}
