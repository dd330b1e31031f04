//! Deterministic seed derivation.
//!
//! Every stochastic component draws from a ChaCha8 substream derived from
//! one master seed plus two indices (for example particle and iteration).
//! Draws therefore never depend on evaluation order or thread count, and
//! the seed-to-output mapping below is a stability contract: it must not
//! change between releases or recorded runs stop being reproducible.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finalizer. Bijective on `u64`, good avalanche behaviour.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives a child seed from a master seed and two stream indices.
///
/// The mapping is `mix(mix(master + GOLDEN*(stream+1)) + GOLDEN*(index+1))`
/// with wrapping arithmetic.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    let a = mix(master.wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1))));
    mix(a.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// A ChaCha8 generator for the `(stream, index)` substream of `master`.
pub fn substream_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream, index))
}

/// One uniform draw in `[0, 1)` with 53 random bits.
///
/// Implemented directly as `(next_u64 >> 11) * 2^-53` so the value does not
/// depend on any distribution code outside this crate.
pub fn unit_uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * 1.1102230246251565e-16
}
