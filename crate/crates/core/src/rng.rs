//! Seeded random streams.
//!
//! Every stochastic step draws from a ChaCha8 generator keyed by the run seed
//! and a stream id, so two runs with the same seed consume identical streams
//! regardless of what other components do with theirs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags keep independent consumers on disjoint streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Shuffle = 2,
    Evolution = 3,
    Split = 4,
    Synthetic = 5,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}
