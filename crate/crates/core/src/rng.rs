//! Seeding and substream derivation.
//!
//! Every random stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`). The
//! 256-bit ChaCha key is expanded from a 64-bit [`Seed`] with SplitMix64, and
//! substream `i` of a seed gets its own key derived from the pair
//! `(seed, i)`. Substreams never depend on the order in which they are
//! requested, so parallel trials reproduce sequential ones bit for bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// 64-bit user-facing seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key_from(mut state: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

impl Seed {
    /// Generator for the main stream of this seed.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(key_from(self.0))
    }

    /// Seed of the `index`-th independent substream.
    pub fn derive(self, index: u64) -> Seed {
        let mut state = self.0 ^ 0x5851_f42d_4c95_7f2d;
        let a = splitmix64(&mut state);
        let mut state = a ^ index.wrapping_mul(GOLDEN_GAMMA);
        Seed(splitmix64(&mut state) ^ splitmix64(&mut state).rotate_left(17))
    }

    pub fn substream(self, index: u64) -> ChaCha8Rng {
        self.derive(index).rng()
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
