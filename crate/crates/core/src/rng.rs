//! Seeded random streams.
//!
//! Every random quantity in the crate comes from ChaCha8 (`rand_chacha`),
//! keyed by `ChaCha8Rng::seed_from_u64(master_seed)` and split into
//! independent 2^64-word streams with `set_stream(stream_id)`. Stream ids are
//! composed from a per-experiment tag and a trial index, so a trial's draws
//! do not depend on which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream tags keep unrelated experiments sharing one seed apart.
pub mod tag {
    pub const TRIAL: u64 = 1;
    pub const HEURISTIC: u64 = 2;
    pub const SIGN_SEARCH: u64 = 3;
    pub const GOOD_SET: u64 = 4;
    pub const KHINTCHINE: u64 = 5;
    pub const KIMVU: u64 = 6;
    pub const NORMS: u64 = 7;
    pub const POWER_START: u64 = 8;
    pub const VERIFY: u64 = 9;
}

/// Stream `stream_id` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream_id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for `(tag, a, b)`: 8 bits of tag, 24 bits of `a`, 32 bits of `b`.
pub fn stream_id(tag: u64, a: u64, b: u64) -> u64 {
    debug_assert!(tag < 1 << 8 && a < 1 << 24 && b < 1 << 32);
    (tag << 56) | ((a & 0xFF_FFFF) << 32) | (b & 0xFFFF_FFFF)
}

pub fn substream(seed: u64, tag: u64, a: u64, b: u64) -> Stream {
    stream(seed, stream_id(tag, a, b))
}

/// Derives a child seed from a parent stream, for APIs that take a plain seed.
pub fn child_seed<R: rand::Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.random()
}
