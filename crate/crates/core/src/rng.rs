//! Seed plumbing. One master seed fans out into independent named streams
//! (codebooks, bin partitions, trials, optimizer restarts) via SplitMix64,
//! and each stream drives its own ChaCha12 generator. The u64→[0,1) mapping
//! is fixed here so sampled values are reproducible across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

// Stream tags. Each (master_seed, tag [+ index]) pair is an independent RNG.
pub(crate) const STREAM_BOOK1: u64 = 0x01;
pub(crate) const STREAM_BOOK2: u64 = 0x02;
pub(crate) const STREAM_ZPART: u64 = 0x03;
// Trials and restarts get a wide base offset so indexed streams never
// collide with the fixed tags above.
pub(crate) const STREAM_TRIAL_BASE: u64 = 0x1_0000;
pub(crate) const STREAM_RESTART_BASE: u64 = 0x2_0000_0000;

/// Derive a child seed from a master seed and a stream index.
///
/// SplitMix64 finalizer over the sum; bijective in `master` for fixed
/// `stream`, well-spread for adjacent streams.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(master: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, stream))
}

/// Uniform draw in [0, 1) with 53 bits of mantissa.
pub(crate) fn next_unit(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw one symbol from a pmf given as cumulative sums (last entry treated
/// as the top regardless of rounding, so the draw always lands).
pub(crate) struct CdfSampler {
    cum: alloc::vec::Vec<f64>,
}

impl CdfSampler {
    pub(crate) fn new(pmf: &[f64]) -> Self {
        let mut cum = alloc::vec::Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &p in pmf {
            acc += p;
            cum.push(acc);
        }
        CdfSampler { cum }
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha12Rng) -> usize {
        let u = next_unit(rng) * self.cum[self.cum.len() - 1];
        for (i, &c) in self.cum.iter().enumerate() {
            if u < c {
                return i;
            }
        }
        self.cum.len() - 1
    }
}

/// Fisher–Yates shuffle driven by the shared u64→unit mapping.
pub(crate) fn shuffle<T>(items: &mut [T], rng: &mut ChaCha12Rng) {
    for i in (1..items.len()).rev() {
        let j = (next_unit(rng) * (i + 1) as f64) as usize;
        let j = j.min(i);
        items.swap(i, j);
    }
}
