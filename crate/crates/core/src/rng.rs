//! Seeded randomness. Every vertex or clique draws from its own ChaCha
//! stream keyed by `(seed, step)` and selected by the entity ID, so results
//! do not depend on iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies which phase of a run a stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Initial,
    Dense(usize),
    FallbackSparse(usize),
    FallbackResidual(usize),
}

impl StreamTag {
    fn code(self) -> u64 {
        let (tag, index) = match self {
            StreamTag::Initial => (1u64, 0),
            StreamTag::Dense(i) => (2, i),
            StreamTag::FallbackSparse(i) => (3, i),
            StreamTag::FallbackResidual(i) => (4, i),
        };
        (tag << 48) | index as u64
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for `entity` in phase `tag` of the run seeded with `seed`.
pub fn stream(seed: u64, tag: StreamTag, entity: usize) -> ChaCha8Rng {
    let mut state = seed ^ tag.code().rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(entity as u64);
    rng
}
