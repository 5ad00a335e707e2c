//! Reproducible random streams.
//!
//! Every random draw in the crate comes from ChaCha8 keyed by a 64-bit seed.
//! The 256-bit key is the seed in little-endian order in bytes 0..8 followed
//! by 24 zero bytes; the 64-bit ChaCha stream id selects an independent
//! substream and the block counter starts at zero. Any ChaCha8 implementation
//! that exposes the stream id (for example `rand_chacha` or the reference C
//! code) reproduces the same sequences.
//!
//! Conversions:
//! - `next_f64`: `(u >> 11) · 2⁻⁵³` on the next 64-bit word, in `[0, 1)`.
//! - `next_normal`: Box–Muller on two consecutive `next_f64` draws `u1, u2`,
//!   `sqrt(−2 ln(1 − u1)) · cos(2π u2)`; the sine branch is discarded.
//! - `below(n)`: Lemire-style rejection on 64-bit words.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream ids used by the crate. Edge streams for SBM rows start at
/// [`streams::SBM_EDGES`] and add the row index.
pub mod streams {
    pub const INIT: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const SBM_FEATURES: u64 = 3;
    pub const LANCZOS: u64 = 4;
    pub const DROPOUT: u64 = 1 << 40;
    pub const SBM_EDGES: u64 = 1 << 48;
}

#[derive(Clone, Debug)]
pub struct CounterRng {
    inner: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        CounterRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
