//! Counter-based uniform generator.
//!
//! Every draw is a pure function of `(seed, stream, i, j)`, so the value a
//! synapse receives does not depend on the order in which synapses are
//! visited. The streams used by this crate are:
//!
//! | stream               | `i`            | `j`              |
//! |----------------------|----------------|------------------|
//! | [`Stream::Pool`]     | column index   | flat input index |
//! | [`Stream::Permanence`] | column index | flat input index |
//! | [`Stream::Shuffle`]  | caller key     | step index       |
//!
//! A value is produced by chaining the SplitMix64 finalizer over the key
//! words and keeping the top 53 bits, giving a double in `[0, 1)`.

use core::cell::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u64)]
pub enum Stream {
    Pool = 1,
    Permanence = 2,
    Shuffle = 3,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const KEY_I: u64 = 0xD1B5_4A32_D192_ED03;
const KEY_J: u64 = 0xABC9_8388_FB8C_AC03;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw 64-bit hash of a key. Exposed so tests can replay the stream.
#[inline]
pub fn keyed_u64(seed: u64, stream: Stream, i: u64, j: u64) -> u64 {
    let mut h = splitmix64(seed ^ (stream as u64).wrapping_mul(GOLDEN));
    h = splitmix64(h ^ i.wrapping_mul(KEY_I));
    splitmix64(h ^ j.wrapping_mul(KEY_J))
}

#[inline]
pub fn keyed_uniform(seed: u64, stream: Stream, i: u64, j: u64) -> f64 {
    (keyed_u64(seed, stream, i, j) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seeded generator that counts how many values it has handed out.
///
/// The counter is a `Cell`, so a generator is `Send` but not `Sync`.
#[derive(Debug, Default)]
pub struct KeyedRng {
    seed: u64,
    draws: Cell<u64>,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            draws: Cell::new(0),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&self, stream: Stream, i: u64, j: u64) -> f64 {
        self.draws.set(self.draws.get() + 1);
        keyed_uniform(self.seed, stream, i, j)
    }

    /// Uniform integer in `0..bound`. `bound` must be non-zero.
    pub fn below(&self, stream: Stream, i: u64, j: u64, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.draws.set(self.draws.get() + 1);
        // Lemire's multiply-shift; bias is below 2^-64 * bound.
        let x = keyed_u64(self.seed, stream, i, j);
        ((x as u128 * bound as u128) >> 64) as u64
    }

    /// Number of values drawn since construction.
    pub fn draws(&self) -> u64 {
        self.draws.get()
    }
}

/// 64-bit FNV-1a, used to turn labels into shuffle keys.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
