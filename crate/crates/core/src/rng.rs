//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the user seed. Independent
//! substreams are obtained by selecting ChaCha's 64-bit stream id, so the
//! draws of replicate `i` depend only on `(seed, i)` and never on how work
//! is scheduled across threads.
//!
//! Stream id layout: the top byte tags the consumer (sampling, Monte-Carlo
//! covariance, campaigns, bootstrap), the remaining 56 bits carry the index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Sample = 0,
    Covariance = 1,
    Campaign = 2,
    Bootstrap = 3,
    Search = 4,
}

const INDEX_MASK: u64 = (1 << 56) - 1;

/// The generator for substream `index` of `purpose` under `seed`.
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (index & INDEX_MASK));
    rng
}

/// Derives a child seed, used when a campaign step needs its own seed space
/// (e.g. one seed per grid point of a size search).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
