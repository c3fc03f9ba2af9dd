//! Seed derivation. Every random choice in the workbench flows from an
//! explicit `u64` seed; nested stages derive child seeds through a splitmix
//! chain so that runs are reproducible regardless of how work is scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One splitmix64 step: decorrelates nearby seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derive a child seed from a master seed and a path of indices. The
/// derivation is compositional: `derive(derive(m, a), b) == derive(m, a ++ b)`,
/// so stages can hand sub-seeds to workers without losing reproducibility.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    let mut s = master;
    for &p in path {
        s = splitmix64(s ^ p.wrapping_mul(0x9e3779b97f4a7c15));
    }
    s
}

/// The workbench RNG: seeded ChaCha, identical on every platform.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
