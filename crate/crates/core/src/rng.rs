//! Seeded, portable random streams.
//!
//! Every stochastic component draws from a ChaCha8 generator seeded with
//! `seed_from_u64(seed)` and switched to a component-specific stream, so the
//! noise, initialization, shuffling and dropout sequences of one run never
//! interfere with each other. Uniforms take the top 53 bits of a `u64`; normal
//! variates use the Marsaglia polar method with the pure-Rust `libm` logarithm,
//! which keeps results bit-identical across platforms.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for the independent random sequences of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Noise = 0,
    Init = 1,
    Shuffle = 2,
    Dropout = 3,
    Subsample = 4,
}

pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Uniform in [0, 1).
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in [0, bound) by rejection, free of modulo bias.
pub fn below<R: RngCore + ?Sized>(rng: &mut R, bound: usize) -> usize {
    assert!(bound > 0);
    let bound = bound as u64;
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % bound) as usize;
        }
    }
}

/// Fisher-Yates shuffle driven by [`below`].
pub fn shuffle<T, R: RngCore + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}

/// Standard normal source (Marsaglia polar method, spare value cached).
#[derive(Debug, Clone)]
pub struct Gaussian<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: RngCore> Gaussian<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * uniform(&mut self.rng) - 1.0;
            let v = 2.0 * uniform(&mut self.rng) - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * libm::log(s) / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    pub fn next(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.next_standard()
    }
}
