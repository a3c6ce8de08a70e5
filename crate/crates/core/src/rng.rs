//! Seed derivation. Every random draw in the crate comes from a stream keyed
//! by `(master seed, purpose tag, index)`, so results never depend on how
//! work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

pub type Stream = Xoshiro256PlusPlus;

/// Purpose tags keep streams for different roles disjoint.
pub mod tag {
    pub const SAMPLE: u64 = 0x5341_4d50;
    pub const TRIAL: u64 = 0x5452_4941;
    pub const CODEBOOK: u64 = 0x434f_4445;
    pub const CHANNEL: u64 = 0x4348_414e;
    pub const CHANNEL_CODEBOOK: u64 = 0x4343_4f44;
    pub const PERTURB: u64 = 0x5045_5254;
}

/// Mixes `(master, tag, index)` into a 64-bit seed.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    let mut sm = SplitMix64::seed_from_u64(master);
    let a = sm.next_u64() ^ tag.rotate_left(17);
    let mut sm = SplitMix64::seed_from_u64(a);
    let b = sm.next_u64().wrapping_add(index);
    SplitMix64::seed_from_u64(b).next_u64()
}

pub fn stream(master: u64, tag: u64, index: u64) -> Stream {
    Stream::seed_from_u64(derive_seed(master, tag, index))
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-cdf draw of a symbol index: the first `i` with `u < cdf[i]`.
/// Counting the entries at or below `u` gives the same index without a
/// data-dependent branch.
#[inline]
pub fn categorical(rng: &mut impl RngCore, cdf: &[f64]) -> usize {
    let u = unit(rng);
    let below: usize = cdf.iter().map(|&c| usize::from(c <= u)).sum();
    below.min(cdf.len() - 1)
}
