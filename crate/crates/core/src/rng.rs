//! Seeded, version-stable random source shared by corpus sampling and resampling.
//!
//! ChaCha8 seeded with `seed_from_u64`; stream `k` is used for the k-th
//! independent task so parallel iterations stay reproducible. Uniform indices
//! come from rejection sampling on `next_u64`, which keeps the sequence
//! independent of any distribution code outside this module.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SeededRng(rng)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    pub fn coin(&mut self) -> bool {
        self.0.next_u64() >> 63 == 1
    }

    /// First `k` elements of a partial Fisher-Yates shuffle of `items`.
    pub fn sample<T: Copy>(&mut self, items: &[T], k: usize) -> Vec<T> {
        let mut pool = items.to_vec();
        let k = k.min(pool.len());
        for i in 0..k {
            let j = i + self.below(pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed_and_stream() {
        let a: Vec<usize> = (0..20).map({ let mut r = SeededRng::new(7); move |_| r.below(1000) }).collect();
        let b: Vec<usize> = (0..20).map({ let mut r = SeededRng::new(7); move |_| r.below(1000) }).collect();
        assert_eq!(a, b);
        let mut s1 = SeededRng::with_stream(7, 1);
        let mut s2 = SeededRng::with_stream(7, 2);
        assert_ne!((0..8).map(|_| s1.below(1 << 30)).collect::<Vec<_>>(), (0..8).map(|_| s2.below(1 << 30)).collect::<Vec<_>>());
    }

    #[test]
    fn sample_without_replacement() {
        let items: Vec<u32> = (0..50).collect();
        let mut picked = SeededRng::new(1).sample(&items, 50);
        picked.sort();
        assert_eq!(picked, items);
        assert_eq!(SeededRng::new(1).sample(&items, 5).len(), 5);
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut r = SeededRng::new(3);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[r.below(4)] += 1;
        }
        assert!(counts.iter().all(|&c| (9_500..10_500).contains(&c)), "{counts:?}");
    }
}
