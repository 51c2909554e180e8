//! Deterministic random streams.
//!
//! One root seed feeds every consumer, each on its own ChaCha stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INIT_STREAM: u64 = 0;
pub const SELECTION_STREAM: u64 = 1;
const FIRST_VARIATION_STREAM: u64 = 2;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-run generator state: one stream for selection plus one per
/// variation operator leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct EaRng {
    pub(crate) selection: ChaCha8Rng,
    pub(crate) variation: Vec<ChaCha8Rng>,
}

impl EaRng {
    pub fn new(seed: u64, variation_leaves: usize) -> Self {
        Self {
            selection: stream_rng(seed, SELECTION_STREAM),
            variation: (0..variation_leaves as u64)
                .map(|i| stream_rng(seed, FIRST_VARIATION_STREAM + i))
                .collect(),
        }
    }
}
