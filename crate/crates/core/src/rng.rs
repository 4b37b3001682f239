//! Seeded random streams.
//!
//! All randomness comes from ChaCha8. A generator is keyed by
//! `ChaCha8Rng::seed_from_u64(seed)` and then placed on a stream: stream 0 is
//! the main sequence, and independent work items (permutation replicates,
//! restarts, folds) use stream `index + 1`. ChaCha output is specified
//! bit-for-bit, so a seed reproduces the same draws on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// The main stream for `seed`.
pub fn seeded(seed: u64) -> Rng {
    stream(seed, 0)
}

/// An independent stream for work item `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    stream(seed, index + 1)
}

fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
