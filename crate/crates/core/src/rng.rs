//! Seeded randomness.
//!
//! Every random draw in the crate comes from one 64-bit seed. Independent
//! consumers get their own ChaCha8 stream (`stream` id), so adding draws to one
//! consumer never shifts the sequence seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod streams {
    pub const KOCH_SIGNS: u64 = 1;
    pub const HOLDER_PAIRS: u64 = 2;
    pub const POINCARE_BALLS: u64 = 3;
    pub const CAMPANATO_BALLS: u64 = 4;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
