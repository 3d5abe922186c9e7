//! Seed derivation. Every random stream in the crate is addressed by
//! `(master seed, domain, index)` so results never depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domains keep streams for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    NullDraw = 1,
    KmeansReplicate = 2,
    AcmLabels = 3,
    AcmFeature = 4,
    AcmCorrelation = 5,
    SimulationRep = 6,
    Svd = 7,
    AltDraw = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, domain: Domain, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(domain as u64)) ^ index)
}

pub fn stream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(domain as u64)));
    rng.set_stream(index);
    rng
}
