//! Counter-based random streams.
//!
//! Every random draw in the crate goes through a ChaCha20 generator keyed by
//! `(seed, stream)`. Distinct streams never overlap, so replicate `i` of an
//! experiment sees the same numbers no matter which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Generator for stream `stream` under key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
