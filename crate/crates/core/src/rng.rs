//! Deterministic per-sample random streams.
//!
//! Every sample index gets its own ChaCha stream derived from `(seed, index)`,
//! so sweeps produce identical draws regardless of how work is split
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

/// Random stream for sample `index` of a sweep seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    rng.gen_range(lo..hi)
}

pub fn unit(rng: &mut SampleRng) -> f64 {
    rng.gen::<f64>()
}
