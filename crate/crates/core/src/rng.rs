use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All seeded randomness in the crate goes through this generator so that
/// results are reproducible across platforms.
pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
