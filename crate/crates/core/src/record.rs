//! Fixed-layout key/value records.

/// A key/value pair laid out as two consecutive fields. `V = ()` gives a
/// record with an empty payload.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(C)]
pub struct Record<K, V> {
    pub key: K,
    pub value: V,
}

impl<K, V> Record<K, V> {
    pub const fn new(key: K, value: V) -> Self {
        Self { key, value }
    }
}

/// Records that expose an owned key.
pub trait HasKey {
    type Key;
    fn key(&self) -> Self::Key;
}

impl<K: Copy, V> HasKey for Record<K, V> {
    type Key = K;
    #[inline]
    fn key(&self) -> K {
        self.key
    }
}

macro_rules! bare_key {
    ($($t:ty),*) => {$(
        impl HasKey for $t {
            type Key = $t;
            #[inline]
            fn key(&self) -> $t {
                *self
            }
        }
    )*};
}

bare_key!(u32, u64, u128);
