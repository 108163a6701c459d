//! Deterministic random streams.
//!
//! Each Monte Carlo path owns a ChaCha8 generator seeded from
//! `mix(master, path)`; within a path, independent roles (driving Brownian
//! increments, the orthogonal price noise, exact-method residuals) use
//! separate ChaCha streams so that changing one role never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type PathRng = ChaCha8Rng;

/// Stream carrying the Gaussian innovations of the driving Brownian motion.
pub const STREAM_DRIVER: u64 = 0;
/// Stream carrying the independent Brownian motion `W⊥` of the price.
pub const STREAM_ORTHOGONAL: u64 = 1;
/// Stream carrying the conditional residual draws of the exact method.
pub const STREAM_RESIDUAL: u64 = 2;

/// SplitMix64 finalizer applied to `master ⊕ golden·(path+1)`.
pub fn derive_seed(master: u64, path: u64) -> u64 {
    let mut z = master ^ path.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn path_rng(master: u64, path: u64, stream: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, path));
    rng.set_stream(stream);
    rng
}

pub fn fill_normals(rng: &mut PathRng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}
