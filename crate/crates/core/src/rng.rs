//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the run seed and a stream id
//! derived from a path of integers (repeat, config, purpose, shard...). Two
//! different paths give independent streams, and a stream only depends on its
//! key, never on which thread consumes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream purposes, used as the first path element under a run key.
pub mod purpose {
    pub const TRAIN: u64 = 1;
    pub const EVAL: u64 = 2;
    pub const REFERENCE: u64 = 3;
    pub const TARGET: u64 = 4;
    pub const G_STAR: u64 = 5;
    pub const RADIUS: u64 = 6;
    pub const CHECK: u64 = 7;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed, id: 0 }
    }

    /// Derive a child key. Children of distinct parents or with distinct
    /// indices are distinct with overwhelming probability.
    pub fn child(self, index: u64) -> Self {
        Self {
            seed: self.seed,
            id: splitmix64(self.id ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    pub fn path(self, indices: &[u64]) -> Self {
        indices.iter().fold(self, |k, &i| k.child(i))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.id);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_stream() {
        let k = StreamKey::new(7).path(&[1, 2, 3]);
        let a: Vec<u64> = k.stream().random_iter().take(8).collect();
        let b: Vec<u64> = k.stream().random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sibling_streams_differ() {
        let root = StreamKey::new(7);
        let a: u64 = root.child(0).stream().random();
        let b: u64 = root.child(1).stream().random();
        let c: u64 = StreamKey::new(8).child(0).stream().random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(root.path(&[1, 2]), root.path(&[2, 1]));
    }
}
