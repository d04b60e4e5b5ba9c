//! Seeded random generator.
//!
//! The generator is xoshiro256** (Blackman & Vigna), seeded by expanding the
//! 64-bit seed through SplitMix64. Uniforms take the top 53 bits of each
//! output word: `(next_u64() >> 11) * 2^-53`. Normals use the Box–Muller
//! transform on a pair of uniforms `(u1, u2)`:
//!
//! ```text
//! r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2π u2),  z1 = r sin(2π u2)
//! ```
//!
//! with `ln`, `sin` and `cos` taken from `libm` so the stream does not depend
//! on the platform's math library. None of this may change: experiment
//! outputs are keyed on it.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    inner: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for a named sub-stream of `seed`.
    ///
    /// Parallel or logically separate consumers get their own stream rather
    /// than sharing one state.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Self::new(splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5EED))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// A Rademacher sign, ±1 with equal probability.
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    fn box_muller(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// One N(0, 1) draw. Box–Muller produces pairs; the second value of a
    /// pair is handed out by the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let (z0, z1) = self.box_muller();
        self.spare_normal = Some(z1);
        z0
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    /// Index drawn with probability proportional to `weights`, given their sum.
    pub fn weighted_index(&mut self, weights: &[f64], total: f64) -> usize {
        let target = self.uniform() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        // Rounding can leave `target` just above the running sum.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

/// `n` iid N(0, 1) draws from `rng` (see the module docs for the transform).
pub fn sample_standard_normal(rng: &mut RngState, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.standard_normal()).collect()
}
