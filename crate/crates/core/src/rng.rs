//! Deterministic random substreams.
//!
//! Every stochastic decision draws from its own generator seeded by
//! `mix(base, step, index)`, so results never depend on evaluation order or on
//! the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags that keep the substreams of different consumers disjoint.
pub mod tag {
    pub const PROPOSAL: u64 = 0x5052_4f50;
    pub const RESAMPLE: u64 = 0x5245_5341;
    pub const PSEUDO_WORDS: u64 = 0x5053_4555;
    pub const ENTROPY: u64 = 0x454e_5452;
    pub const POLICY: u64 = 0x504f_4c49;
    pub const TEACHER: u64 = 0x5445_4143;
    pub const ENVIRONMENT: u64 = 0x454e_5649;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes `(base, step, index)` into a 64-bit seed.
pub fn mix(base: u64, step: u64, index: u64) -> u64 {
    let a = splitmix64(base);
    let b = splitmix64(a ^ step.rotate_left(21));
    splitmix64(b ^ index.rotate_left(42))
}

/// Generator for substream `(base ^ tag, step, index)`.
pub fn substream(base: u64, tag: u64, step: u64, index: u64) -> Rng {
    Rng::seed_from_u64(mix(base ^ tag.rotate_left(7), step, index))
}
