//! Reproducible random substreams.
//!
//! Every block of the sample pool owns the ChaCha stream `(seed, block)`, so
//! the numbers a block sees do not depend on how blocks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// RNG for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
