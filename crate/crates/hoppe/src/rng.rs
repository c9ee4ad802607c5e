//! Deterministic seed derivation for replicate- and slot-parallel sampling.
//!
//! Every stochastic routine in this crate takes either an explicit RNG or a
//! master seed. Parallel code never shares an RNG: each unit of work (a
//! replicate, or a pool slot within a generation) derives its own stream via
//! [`derive_seed`], so results are bit-identical no matter how many threads
//! run the map.

use rand_chacha::ChaCha8Rng;

/// The RNG used throughout. ChaCha8 is a stable, seedable algorithm, so a
/// fixed seed reproduces the same stream across platforms and versions.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 step; good avalanche, used only for seed derivation.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed from `(master, stream, index)`.
///
/// `stream` separates uses within one experiment (e.g. "trees" vs "jumps",
/// or the generation number of a pool), `index` separates parallel units
/// (replicate or slot).
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let a = splitmix64(master ^ stream.wrapping_mul(0xA24B_AED4_963E_E407));
    splitmix64(a ^ index.wrapping_mul(0x9FB2_1C65_1E98_DF25))
}

/// A fresh RNG for one unit of work.
pub fn substream(master: u64, stream: u64, index: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(derive_seed(master, stream, index))
}
