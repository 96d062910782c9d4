//! Seeded random streams.
//!
//! All randomness goes through ChaCha8 seeded from a `u64`
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`), whose output is specified
//! independently of platform and word size.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SeedStream;

pub fn seeded(seed: u64) -> SeedStream {
    SeedStream::seed_from_u64(seed)
}

/// Independent stream number `index` derived from a run seed.
pub fn substream(seed: u64, index: u64) -> SeedStream {
    let mut rng = seeded(seed);
    rng.set_stream(index);
    rng
}
