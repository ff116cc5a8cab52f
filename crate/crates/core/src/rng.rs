//! Seeding conventions.
//!
//! Every random quantity is drawn from a ChaCha20 stream. Child seeds are
//! derived from a root seed and a stream id with a SplitMix64 finalizer, so
//! ensemble member `i` of component `c` always sees the same numbers no matter
//! how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream ids used by the experiment runner.
pub mod stream {
    pub const PATH: u64 = 1;
    pub const DATA: u64 = 2;
    pub const PROBE: u64 = 3;
    pub const ENSEMBLE: u64 = 0x100;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `root` for the given stream id.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(root) ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
