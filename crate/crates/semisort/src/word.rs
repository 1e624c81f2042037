//! Fixed-width little-endian words used as keys and payloads on disk.

use std::fmt::Write;

pub trait Word: Copy + Ord + Send + Sync + std::fmt::Debug + 'static {
    const BITS: u32;
    const BYTES: usize = (Self::BITS / 8) as usize;

    /// Truncating conversion from a random or generated value.
    fn from_u64(x: u64) -> Self;

    /// Widest random value built from two 64-bit draws.
    fn from_pair(lo: u64, hi: u64) -> Self;

    /// Low 64 bits.
    fn low_u64(self) -> u64;

    fn write_le(self, out: &mut Vec<u8>);

    fn read_le(bytes: &[u8]) -> Self;

    fn write_text(self, out: &mut String);
}

macro_rules! int_word {
    ($t:ty) => {
        impl Word for $t {
            const BITS: u32 = <$t>::BITS;

            fn from_u64(x: u64) -> Self {
                x as $t
            }

            fn from_pair(lo: u64, hi: u64) -> Self {
                (((hi as u128) << 64) | lo as u128) as $t
            }

            fn low_u64(self) -> u64 {
                self as u64
            }

            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }

            fn read_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes.try_into().expect("word width"))
            }

            fn write_text(self, out: &mut String) {
                let _ = write!(out, "{self}");
            }
        }
    };
}

int_word!(u32);
int_word!(u64);
int_word!(u128);

impl Word for () {
    const BITS: u32 = 0;

    fn from_u64(_: u64) -> Self {}

    fn from_pair(_: u64, _: u64) -> Self {}

    fn low_u64(self) -> u64 {
        0
    }

    fn write_le(self, _: &mut Vec<u8>) {}

    fn read_le(_: &[u8]) -> Self {}

    fn write_text(self, _: &mut String) {}
}
