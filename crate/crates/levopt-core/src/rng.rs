//! Deterministic, splittable random streams.
//!
//! All randomness in the toolkit flows through [`RngStream`]: a ChaCha12
//! generator whose seed is derived from a master seed plus a path of integer
//! tags. Two streams with different tag paths are statistically independent,
//! so replications, methods, and purposes (grid draw, noise, shuffling) can
//! each get their own stream and be executed in any order without changing
//! any result. Given the same master seed and tags, a stream reproduces the
//! same values on every platform.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::geom::Point;

/// SplitMix64 step; a well-mixed 64-bit permutation used only for seed
/// derivation, never as the sampling generator itself.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for the substream identified by `tags` under `master`.
///
/// The derivation folds each tag through SplitMix64, so `[1, 2]`, `[2, 1]`
/// and `[1]` all land in unrelated regions of seed space.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0xD605_BBB5_8C8A_BC2D).wrapping_add(out);
        out = splitmix64(&mut state);
    }
    out
}

/// A named, deterministic random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha12Rng,
}

impl RngStream {
    /// Stream seeded directly from a 64-bit seed.
    pub fn from_seed(seed: u64) -> Self {
        RngStream { inner: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Stream for the substream `tags` of `master`; see [`derive_seed`].
    pub fn substream(master: u64, tags: &[u64]) -> Self {
        Self::from_seed(derive_seed(master, tags))
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform point in the unit cube `[0, 1)^dim`.
    pub fn uniform_point(&mut self, dim: usize) -> Point {
        let mut x = Vec::with_capacity(dim);
        for _ in 0..dim {
            x.push(self.uniform());
        }
        x
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Fisher-Yates shuffle of `xs`.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        xs.shuffle(&mut self.inner);
    }
}

impl rand::TryRng for RngStream {
    type Error = core::convert::Infallible;

    fn try_next_u32(&mut self) -> core::result::Result<u32, Self::Error> {
        Ok(self.inner.next_u32())
    }

    fn try_next_u64(&mut self) -> core::result::Result<u64, Self::Error> {
        Ok(self.inner.next_u64())
    }

    fn try_fill_bytes(&mut self, dst: &mut [u8]) -> core::result::Result<(), Self::Error> {
        self.inner.fill_bytes(dst);
        Ok(())
    }
}
