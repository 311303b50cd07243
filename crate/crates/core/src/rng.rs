//! Portable seeded randomness.
//!
//! The generator is xoshiro256++ seeded from a `u64` through SplitMix64 (the
//! reference seeding procedure). Uniform doubles take the top 53 bits,
//! `(x >> 11) * 2^-53`, and normals use the cosine branch of Box–Muller with
//! `u1` drawn from (0, 1]. Any implementation following these three rules
//! reproduces the same streams.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::linalg::{normalized, C64};

pub struct Rng(Xoshiro256PlusPlus);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Standard complex Gaussian, real then imaginary part.
    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn complex_vector(&mut self, dim: usize) -> Vec<C64> {
        (0..dim).map(|_| self.complex_normal()).collect()
    }

    /// Uniformly distributed unit vector in C^dim.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<C64> {
        loop {
            if let Some(v) = normalized(&self.complex_vector(dim)) {
                return v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = {
            let mut r = Rng::new(42);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = Rng::new(42);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(Rng::new(43).next_u64(), a[0]);
    }

    #[test]
    fn uniform_range_and_normal_moments() {
        let mut r = Rng::new(1);
        let n = 20000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let z = r.normal();
            sum += z;
            sq += z * z;
        }
        assert!((sum / n as f64).abs() < 0.03);
        assert!((sq / n as f64 - 1.0).abs() < 0.05);
    }
}
