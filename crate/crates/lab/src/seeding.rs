//! Seed splitting.
//!
//! Sample `i` of every experiment draws its noise from `base ^ i`. Auxiliary
//! randomness in the same sample (the Lie Brownian oracle) uses the tagged
//! stream `splitmix64(base ^ i ^ tag)`, so adding an auxiliary stream never
//! changes the field samples.

/// Tag of the oracle stream.
pub const ORACLE_TAG: u64 = 0x6f72_6163_6c65_0001;

/// Seed of sample `i`.
pub fn sample_seed(base: u64, i: usize) -> u64 {
    base ^ i as u64
}

/// Seed of the auxiliary stream `tag` within sample `i`.
pub fn tagged_seed(base: u64, i: usize, tag: u64) -> u64 {
    splitmix64(sample_seed(base, i) ^ tag)
}

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
