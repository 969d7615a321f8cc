//! Reproducible per-replicate random streams.

use rand::rngs::SmallRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator used for every simulation stream.
pub type StreamRng = ChaCha8Rng;

/// Human-readable statement of [`replicate_stream`], embedded in reports.
pub const STREAM_RULE: &str =
    "ChaCha8 seeded with SHA-256(le64(master_seed) || le64(len(id)) || id || le64(replicate))";

/// Stream for one replicate. Depends only on its arguments, so the degree of
/// parallelism never changes results.
pub fn replicate_stream(master_seed: u64, experiment: &str, replicate: u64) -> StreamRng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((experiment.len() as u64).to_le_bytes());
    h.update(experiment.as_bytes());
    h.update(replicate.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Compact per-cell generator. A cell's stream is split off its parent's, so a
/// given label sees the same noise in every run that contains it.
pub type CellRng = SmallRng;

pub fn split_cell_rng<R: RngCore + ?Sized>(parent: &mut R) -> CellRng {
    let mut seed = [0u8; 32];
    parent.fill_bytes(&mut seed);
    SmallRng::from_seed(seed)
}

/// Stream for a single-shot run keyed only by a seed.
pub fn seeded(seed: u64) -> StreamRng {
    replicate_stream(seed, "", 0)
}

/// Names an experiment's family of replicate streams.
#[derive(Clone, Debug)]
pub struct StreamSource {
    pub master_seed: u64,
    pub id: String,
}

impl StreamSource {
    pub fn new(master_seed: u64, id: impl Into<String>) -> Self {
        StreamSource {
            master_seed,
            id: id.into(),
        }
    }

    pub fn stream(&self, replicate: u64) -> StreamRng {
        replicate_stream(self.master_seed, &self.id, replicate)
    }

    /// Child source whose streams are disjoint from this one's.
    pub fn child(&self, suffix: &str) -> StreamSource {
        StreamSource {
            master_seed: self.master_seed,
            id: format!("{}/{}", self.id, suffix),
        }
    }
}
