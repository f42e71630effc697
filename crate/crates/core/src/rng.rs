//! Deterministic seeding.
//!
//! Every random draw in the crate goes through [`rng_from_seed`], a ChaCha8
//! stream whose output is stable across platforms and crate versions.
//! Trial seeds are derived with [`split_seed`], so a trial's randomness
//! depends only on `(base, sweep value, trial index)` and never on the
//! order trials are scheduled in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a per-trial seed: `splitmix64(splitmix64(base ^ mix(sweep)) ^ mix(trial))`.
pub fn split_seed(base: u64, sweep_value: u64, trial: u64) -> u64 {
    let a = splitmix64(base ^ splitmix64(sweep_value.wrapping_add(0x5EED)));
    splitmix64(a ^ splitmix64(trial.wrapping_mul(0xA24B_AED4_963E_E407)))
}

/// Derives an independent sub-stream seed for a named purpose within a trial.
pub fn substream(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag ^ 0xD1B5_4A32_D192_ED03))
}
