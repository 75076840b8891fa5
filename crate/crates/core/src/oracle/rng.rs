//! Counter-based random streams: every sample owns a ChaCha stream selected by
//! its index, so any partition of the index range reproduces the same draws.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples handed to one parallel task; the split never affects results.
pub(crate) const CHUNK: u64 = 1 << 16;

#[derive(Clone)]
pub(crate) struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator for sample `index`, independent of every other index.
    pub(crate) fn stream(&self, index: u64) -> ChaCha8Rng {
        // The base generator is never advanced, so each clone starts at word 0.
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}

/// Unit-mean exponential variate by inversion; `U ∈ (0, 1)` keeps it finite.
#[inline]
pub(crate) fn exp1<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln()
}

/// `[start, end)` ranges covering `0..total` in fixed-size chunks.
pub(crate) fn chunks(total: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..total.div_ceil(CHUNK)).map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(total)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_depend_only_on_seed_and_index() {
        let f = StreamFactory::new(7);
        let mut a = f.stream(12_345);
        let _ = f.stream(3).random::<u64>();
        let mut b = StreamFactory::new(7).stream(12_345);
        for _ in 0..100 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
        let mut c = f.stream(12_346);
        assert_ne!(f.stream(12_345).random::<u64>(), c.random::<u64>());
    }

    #[test]
    fn exponential_mean() {
        let f = StreamFactory::new(1);
        let mut rng = f.stream(0);
        let n = 200_000;
        let mean = (0..n).map(|_| exp1(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn chunk_cover() {
        let v: Vec<_> = chunks(CHUNK * 2 + 5).collect();
        assert_eq!(v, vec![(0, CHUNK), (CHUNK, 2 * CHUNK), (2 * CHUNK, 2 * CHUNK + 5)]);
        assert_eq!(chunks(0).count(), 0);
    }
}
