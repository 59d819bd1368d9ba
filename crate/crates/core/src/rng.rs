//! Seeded randomness.
//!
//! All generators in this crate are ChaCha8 streams keyed by a `u64` seed
//! (`ChaCha8Rng::seed_from_u64`). The stream is specified independently of
//! platform and word size, so a seed reproduces the same draws everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
