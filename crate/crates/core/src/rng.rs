//! Seeded generator helpers shared by sampling and the simulation harness.
//!
//! Every stream in this crate comes from a ChaCha8 generator; the generator
//! identity is part of the reproducibility contract, so outputs only change
//! if the seed or the consumption order changes.

use rand_core::RngCore;

/// Uniform draw in `[0, 1)` built from the 53 high bits of one `u64`.
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `[0, bound)`.
///
/// Plain modulo reduction: the bias is below 2^-49 for every bound this
/// crate uses (population sizes), far under statistical resolution.
pub(crate) fn index(rng: &mut impl RngCore, bound: usize) -> usize {
    debug_assert!(bound > 0);
    (rng.next_u64() % bound as u64) as usize
}

/// Cheap splitmix64 step for deriving independent sub-seeds from a master
/// seed without consuming the master stream.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
