//! Seeded random streams: one ChaCha8 stream per replication.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replication `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a sub-seed so separate experiment arms (e.g. different `n`) draw
/// from unrelated streams under one master seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
