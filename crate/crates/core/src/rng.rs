//! Portable random source for the graph generators.
//!
//! Every random draw in this crate goes through [`GraphRng`], so a run can be
//! reproduced bit-for-bit in another language by porting the few lines below.
//!
//! * Core generator: reference PCG32 (`pcg32_srandom_r` / `pcg32_random_r`):
//!   64-bit LCG state, multiplier `6364136223846793005`, increment
//!   `(STREAM << 1) | 1`, XSH-RR output. Seeding is `state = 0; step;
//!   state += seed; step`.
//! * `next_u64` = `lo | (hi << 32)` from two consecutive 32-bit outputs.
//! * `next_f64` = `(next_u64 >> 11) * 2^-53`, uniform in `[0, 1)`.
//! * `below(n)` = Lemire's multiply-and-reject on `next_u64`.

use rand_pcg::rand_core::Rng;
use rand_pcg::Pcg32;

/// PCG stream selector shared by all generators.
pub const STREAM: u64 = 0xda3e_39cb_94b9_5bdb;

/// Step between connectivity retries: retry `a` uses `seed + a * RETRY_STRIDE`.
pub const RETRY_STRIDE: u64 = 0x9E37_79B9;

#[derive(Debug, Clone)]
pub struct GraphRng(Pcg32);

impl GraphRng {
    pub fn new(seed: u64) -> Self {
        GraphRng(Pcg32::new(seed, STREAM))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        let lo = u64::from(self.next_u32());
        let hi = u64::from(self.next_u32());
        lo | (hi << 32)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

/// SplitMix64 finalizer, used to derive per-run seeds from a base seed.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_pcg32() {
        // pcg32_srandom_r(&rng, 42, 54) from the PCG reference demo.
        let mut rng = Pcg32::new(42, 54);
        let expected = [
            0xa15c02b7u32,
            0x7b47f409,
            0xba1d3330,
            0x83d2f293,
            0xbfa4784b,
            0xcbed606e,
        ];
        for e in expected {
            assert_eq!(rng.next_u32(), e);
        }
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = GraphRng::new(7);
        for n in [1u64, 2, 3, 10, 1000, u64::MAX / 3] {
            for _ in 0..200 {
                assert!(rng.below(n) < n);
            }
        }
    }

    #[test]
    fn f64_in_unit_interval() {
        let mut rng = GraphRng::new(1);
        let mean: f64 = (0..10_000).map(|_| rng.next_f64()).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02);
    }
}
