//! Seed derivation.
//!
//! `split(master, i)` is a counter-based SplitMix64 step: the counter is
//! advanced by `(i + 1) * 0x9E3779B97F4A7C15` from `master` and then passed
//! through the SplitMix64 finalizer (multipliers `0xBF58476D1CE4E5B9`,
//! `0x94D049BB133111EB`, shifts 30/27/31).  Trajectory `i` of an ensemble
//! uses `split(master, 2i)` for its initial configuration and
//! `split(master, 2i + 1)` for its dynamics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn split(master: u64, i: u64) -> u64 {
    mix64(master.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn init_seed(master: u64, trajectory: u64) -> u64 {
    split(master, 2 * trajectory)
}

pub fn dynamics_seed(master: u64, trajectory: u64) -> u64 {
    split(master, 2 * trajectory + 1)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
