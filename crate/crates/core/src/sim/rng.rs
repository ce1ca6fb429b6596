//! Replication streams. Replication `k` of a batch seeded with `master` draws
//! from `ChaCha8Rng::seed_from_u64(master)` on stream `k`, so every
//! replication is reproducible on its own, independent of scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(master: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(stream);
        Stream(rng)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `Exp(rate)` by inversion.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(master: u64, stream: u64) -> Vec<f64> {
        let mut s = Stream::new(master, stream);
        (0..4).map(|_| s.uniform()).collect()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = draws(7, 3);
        assert_eq!(a, draws(7, 3));
        assert_ne!(a, draws(7, 4));
        assert_ne!(a, draws(8, 3));
        assert!(a.iter().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn exponential_mean() {
        let mut s = Stream::new(1, 0);
        let n = 200_000;
        let mean = (0..n).map(|_| s.exponential(2.0)).sum::<f64>() / n as f64;
        // stderr of the mean is 0.5 / sqrt(n) ≈ 0.0011
        assert!((mean - 0.5).abs() < 0.006, "{mean}");
    }
}
