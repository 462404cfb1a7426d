//! Deterministic random streams.
//!
//! Everything random in this crate runs on ChaCha8, a counter-based
//! stream-cipher generator: a (seed, stream) pair fully determines the
//! output, so independent trials can draw from disjoint substreams with
//! no shared mutable state, and results do not depend on the order in
//! which the substreams are consumed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for a standalone seeded draw.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the substream of `master_seed` selected by `ids`.
/// Distinct id tuples select statistically independent streams.
pub fn substream(master_seed: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(mix(ids));
    rng
}

/// Collapses an id tuple into a 64-bit stream id (SplitMix64 finalizer).
pub fn mix(ids: &[u64]) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut state: u64 = GOLDEN;
    for &id in ids {
        state = state.wrapping_add(id).wrapping_add(GOLDEN);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}
