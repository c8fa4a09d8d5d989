//! Named, splittable random streams.
//!
//! Every random choice in the crate is drawn from a ChaCha8 stream whose key is
//! derived from the user seed and a path of integer tags (construction, level,
//! block, side, vertex...). Streams are therefore independent of iteration
//! order and identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of a random stream: the root seed folded with a path of tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn root(seed: u64) -> Self {
        StreamKey(mix64(seed))
    }

    /// Derive an independent child stream.
    pub fn child(self, tag: u64) -> Self {
        StreamKey(mix64(self.0 ^ mix64(tag.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D)))
    }

    /// Derive along a path of tags.
    pub fn path(self, tags: &[u64]) -> Self {
        tags.iter().fold(self, |k, &t| k.child(t))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut z = self.0;
        for chunk in seed.chunks_exact_mut(8) {
            z = mix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

/// Tags naming the top-level streams.
pub mod tags {
    pub const BIPARTITE: u64 = 1;
    pub const STRONG: u64 = 2;
    pub const H_TREE: u64 = 3;
    pub const G_THETA: u64 = 4;
    pub const HD: u64 = 5;
    pub const BOUNDED_SPREAD: u64 = 6;
    pub const ATTACK: u64 = 7;
    pub const PAIRS: u64 = 8;
    pub const RESAMPLE: u64 = 9;
    pub const LSO_CHECK: u64 = 10;
    pub const SIDE_LEFT: u64 = 0x4C;
    pub const SIDE_RIGHT: u64 = 0x52;
}
