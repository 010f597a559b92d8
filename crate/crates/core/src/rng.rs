//! Seeded, chunked random streams.
//!
//! Every stochastic routine in the crate draws from ChaCha8 keyed by the
//! user seed. The draw sequence is cut into chunks of [`CHUNK_LEN`] draws and
//! chunk `c` uses ChaCha stream `c`, so any chunk can be regenerated on its own
//! and parallel runs produce the same output as sequential ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of draws served by one ChaCha stream.
pub const CHUNK_LEN: u64 = 1 << 16;

/// Generator positioned at the start of chunk `chunk` for `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Sequential reader over the chunked stream. Each call to [`uniform`]
/// consumes one draw index.
///
/// [`uniform`]: ChunkedUniform::uniform
#[derive(Clone, Debug)]
pub struct ChunkedUniform {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl ChunkedUniform {
    pub fn new(seed: u64) -> Self {
        Self::starting_at(seed, 0)
    }

    /// Reader positioned at draw `index`; `index` must be a chunk boundary
    /// or the reader skips forward within the chunk.
    pub fn starting_at(seed: u64, index: u64) -> Self {
        let chunk = index / CHUNK_LEN;
        let mut rng = chunk_rng(seed, chunk);
        for _ in 0..index % CHUNK_LEN {
            let _: f64 = rng.random();
        }
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the next draw.
    pub fn position(&self) -> u64 {
        self.index
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        if self.index > 0 && self.index.is_multiple_of(CHUNK_LEN) {
            self.rng = chunk_rng(self.seed, self.index / CHUNK_LEN);
        }
        self.index += 1;
        self.rng.random()
    }

    /// Uniform index in `0..n` (`n > 0`).
    pub fn index_below(&mut self, n: usize) -> usize {
        let i = (self.uniform() * n as f64) as usize;
        i.min(n - 1)
    }
}

/// Inverse-CDF pick over cumulative weights (last entry treated as 1).
pub fn pick(cdf: &[f64], u: f64) -> usize {
    match cdf.iter().position(|&c| u < c) {
        Some(i) => i,
        None => cdf.len() - 1,
    }
}

/// Cumulative sums of `probabilities`.
pub fn cumulative(probabilities: &[f64]) -> alloc::vec::Vec<f64> {
    let mut acc = 0.0;
    probabilities
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn resuming_mid_stream_matches_sequential() {
        let mut seq = ChunkedUniform::new(9);
        let all: Vec<f64> = (0..CHUNK_LEN + 10).map(|_| seq.uniform()).collect();
        let mut resumed = ChunkedUniform::starting_at(9, CHUNK_LEN - 3);
        for k in 0..13 {
            assert_eq!(resumed.uniform(), all[(CHUNK_LEN - 3) as usize + k]);
        }
    }

    #[test]
    fn pick_handles_rounding_tail() {
        let cdf = cumulative(&[0.25, 0.25, 0.5]);
        assert_eq!(pick(&cdf, 0.0), 0);
        assert_eq!(pick(&cdf, 0.3), 1);
        assert_eq!(pick(&cdf, 0.9999999), 2);
        assert_eq!(pick(&[0.3, 0.999_999_999], 0.9999999999), 1);
    }
}
