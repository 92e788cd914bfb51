//! Seeded, portable randomness.
//!
//! Every random component owns a [`StreamRng`] (ChaCha8). Sub-generators are
//! seeded from `SHA-256(base seed || component name || replica index)`, so a
//! component's draws depend only on its identity, never on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stable sub-seed for `(seed, component, replica)`.
    pub fn derive_seed(seed: u64, component: &str, replica: u64) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update((component.len() as u64).to_le_bytes());
        hasher.update(component.as_bytes());
        hasher.update(replica.to_le_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    /// Independent generator for a named sub-component.
    pub fn split(&self, component: &str, replica: u64) -> StreamRng {
        StreamRng::new(Self::derive_seed(self.seed, component, replica))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Standard normal draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// `k` distinct indices from `[0, n)`, sorted ascending.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        // partial Fisher-Yates
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        let mut chosen = pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = StreamRng::new(7);
        let mut b = StreamRng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derived_seeds_depend_on_every_part() {
        let base = StreamRng::derive_seed(42, "model", 0);
        assert_eq!(base, StreamRng::derive_seed(42, "model", 0));
        assert_ne!(base, StreamRng::derive_seed(43, "model", 0));
        assert_ne!(base, StreamRng::derive_seed(42, "model", 1));
        assert_ne!(base, StreamRng::derive_seed(42, "modem", 0));
    }

    #[test]
    fn derived_seed_is_pinned() {
        // guards against accidental changes to the derivation
        let a = StreamRng::derive_seed(42, "stream:sea", 0);
        let mut r = StreamRng::new(a);
        let first = r.next_u64();
        let mut r2 = StreamRng::new(42).split("stream:sea", 0);
        assert_eq!(first, r2.next_u64());
    }

    #[test]
    fn sample_indices_are_distinct_sorted() {
        let mut r = StreamRng::new(3);
        for _ in 0..50 {
            let s = r.sample_indices(10, 4);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 10));
        }
        assert_eq!(r.sample_indices(3, 5), vec![0, 1, 2]);
    }
}
