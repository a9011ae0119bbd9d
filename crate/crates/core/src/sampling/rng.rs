//! Seeded random streams.
//!
//! All randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)` and switched to a per-purpose stream id with
//! `set_stream`. Uniform variates take the top 53 bits of `next_u64()`,
//! `u = ((x >> 11) + 0.5) · 2⁻⁵³`, which lies strictly inside (0, 1).
//! Gaussian variates use the Box–Muller transform on consecutive uniform
//! pairs `(u1, u2)`: `√(−2 ln u1)·cos(2πu2)` first, then `…·sin(2πu2)`.
//! Matrices are filled row-major.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Stream ids, one per consumer, so changing one stage never perturbs another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Measurement,
    Noise,
    PowerIteration,
    /// Symbol draws for the signal at this index.
    Symbols(u32),
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Measurement => 0,
            Stream::Noise => 1,
            Stream::PowerIteration => 2,
            Stream::Symbols(i) => 16 + i as u64,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Standard-normal source following the documented Box–Muller scheme.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64, stream: Stream) -> Self {
        Self {
            rng: stream_rng(seed, stream),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        uniform53(&mut self.rng)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = uniform53(&mut self.rng);
        let u2 = uniform53(&mut self.rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform integer in `0..n` (by rejection, unbiased).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.rng.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }
}

fn uniform53(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
