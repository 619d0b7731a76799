//! Seed handling shared by every stochastic routine.
//!
//! All randomness flows from explicit `u64` seeds through ChaCha8, so a
//! run is reproducible bit-for-bit from its master seed. Monte Carlo
//! batches use `batch_seed = master_seed + batch_index`; independent
//! purposes (artifacts, codebook, schedule, noise) draw from separate
//! streams via [`stream_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for Monte Carlo batch `index` under `master`.
pub fn batch_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index)
}

/// Named sub-streams of a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Artifacts = 1,
    Codebook = 2,
    Schedule = 3,
    Symbols = 4,
    Noise = 5,
    Precoders = 6,
    Jamming = 7,
}

/// Decorrelates `master` for a given purpose (splitmix64 finalizer).
pub fn stream_seed(master: u64, stream: Stream) -> u64 {
    let mut z = master ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
