//! Seeded random streams.
//!
//! Every sampler takes a `&mut SimRng`. Experiments derive one stream per
//! replicate from `(base_seed, experiment_id, replicate)` so results do not
//! depend on the order in which replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// Generator for a plain integer seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-based family of independent streams keyed by a base seed and an
/// experiment label.
#[derive(Clone, Debug)]
pub struct SeedStream {
    key: [u8; 32],
}

impl SeedStream {
    pub fn new(base_seed: u64, experiment_id: &str) -> Self {
        let mut h = Sha256::new();
        h.update(base_seed.to_le_bytes());
        h.update((experiment_id.len() as u64).to_le_bytes());
        h.update(experiment_id.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        SeedStream { key }
    }

    /// Stream for replicate `i`. Uses the ChaCha stream id, so distinct
    /// replicates never share keystream.
    pub fn rng(&self, i: u64) -> SimRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(i);
        rng
    }

    /// Derived sub-family, e.g. one per grid point of an experiment.
    pub fn child(&self, label: &str) -> SeedStream {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(label.as_bytes());
        let mut key = [0u8; 32];
        key.copy_from_slice(&h.finalize());
        SeedStream { key }
    }

    /// A 64-bit seed for replicate `i`, for APIs that take integer seeds.
    pub fn seed(&self, i: u64) -> u64 {
        use rand::RngCore;
        self.rng(i).next_u64()
    }
}
