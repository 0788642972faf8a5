//! Seedable random streams with cheap derivation of independent substreams.
//!
//! Every stochastic component takes an explicit [`RngHandle`]; nothing in the
//! crate touches ambient randomness. Trials derive their own seed from a
//! master seed and an index, so batches can run in parallel (or be replayed
//! one at a time) without coordinating generator state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A single-owner random stream. Identical seeds yield identical draw
/// sequences on every platform.
#[derive(Clone, Debug)]
pub struct RngHandle {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        RngHandle {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for trial `index` of a batch with the given master seed.
    pub fn for_trial(master_seed: u64, index: u64) -> Self {
        RngHandle::new(derive_seed(master_seed, index))
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// Mixes a master seed and a stream index into one well-spread 64-bit seed
/// (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
