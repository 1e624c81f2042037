//! 64-bit hashing primitives shared by the key adapters, the heavy table and
//! the base-case hash tables.

/// Avalanche finalizer (the SplitMix64 / Stafford variant 13 mixer).
#[inline]
pub const fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Golden-ratio increment used to space counters and salts.
pub const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Rehash `h` under a salt. Used once the hash bits of a key have been used
/// up by the per-level bucket slices, or when a level failed to shrink.
#[inline]
pub const fn salted(h: u64, salt: u64) -> u64 {
    mix64(h ^ salt.wrapping_mul(GOLDEN_GAMMA))
}

/// Hash a byte string: polynomial accumulation over 8-byte words followed by
/// a final mix.
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    const MUL: u64 = 0x100_0000_01b3;
    let mut acc = 0xcbf2_9ce4_8422_2325u64 ^ (bytes.len() as u64);
    let mut chunks = bytes.chunks_exact(8);
    for c in &mut chunks {
        let w = u64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]);
        acc = (acc ^ w).wrapping_mul(MUL).rotate_left(29);
    }
    let mut tail = 0u64;
    for (i, &b) in chunks.remainder().iter().enumerate() {
        tail |= (b as u64) << (8 * i);
    }
    mix64((acc ^ tail).wrapping_mul(MUL))
}

/// Order-sensitive combination of two hashes.
#[inline]
pub const fn combine(seed: u64, h: u64) -> u64 {
    mix64(seed.rotate_left(5) ^ h.wrapping_add(GOLDEN_GAMMA))
}

/// Slot index in a power-of-two table with `1 << bits` slots. Uses the high
/// bits of a remixed hash so that keys sharing low hash bits (every key in one
/// light bucket does) still spread over the table.
#[inline]
pub const fn slot(h: u64, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        (mix64(h.wrapping_add(GOLDEN_GAMMA)) >> (64 - bits)) as usize
    }
}
