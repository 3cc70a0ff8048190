// SPDX-License-Identifier: Apache-2.0

//! Counter-addressed random streams.
//!
//! Every stream is ChaCha20 keyed by `seed` (expanded with `rand_core`'s
//! `seed_from_u64`, a PCG32 fill) and selected by a 64-bit stream number, so
//! work item `k` can draw from `(seed, k)` regardless of execution order.
//! The derived draws are implemented here rather than through `rand`'s
//! distributions so their algorithms are fixed:
//!
//! * uniform `[0, 1)`: top 53 bits of a `u64` times 2^-53;
//! * index in `0..n`: rejection sampling on `u64`, then `x % n`;
//! * standard normal: Box–Muller cosine branch, one normal per two uniforms.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct Stream(ChaCha20Rng);

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`; `n` must be nonzero.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range is empty");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        // 1 - u lies in (0, 1], keeping the log finite
        let radius = (-2.0 * (1.0 - self.uniform()).ln()).sqrt();
        radius * (std::f64::consts::TAU * self.uniform()).cos()
    }

    /// Fisher–Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}
