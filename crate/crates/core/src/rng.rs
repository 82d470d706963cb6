use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// A `(seed, stream)` pair. Identical pairs give bit-identical draws and
/// distinct streams under one seed are independent ChaCha streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream for replica `i` of an ensemble rooted at this stream.
    pub fn replica(&self, i: u64) -> RngStream {
        RngStream::new(self.seed, self.stream_id.wrapping_add(i))
    }
}
