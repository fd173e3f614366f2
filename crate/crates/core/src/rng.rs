//! Seeded, stream-separated randomness.
//!
//! Every source of randomness in a run is a [`SeededRng`] derived from a
//! 64-bit base seed and a [`StreamId`]. Streams with distinct ids produce
//! independent sequences even under the same base seed, so the learner's
//! internal randomness and the exploration randomness of the bandit wrapper
//! can be varied (or conditioned on) separately.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Label for a randomness stream within a run.
///
/// The well-known streams are provided as constants; ad-hoc streams (one per
/// simulated agent, say) can be derived with [`StreamId::offset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId(pub u64);

impl StreamId {
    /// Learner-internal randomness (action sampling of the wrapped algorithm).
    pub const LEARNER: StreamId = StreamId(1);
    /// Exploration randomness of the bandit reduction.
    pub const EXPLORATION: StreamId = StreamId(2);
    /// Principal selection randomness in game simulations.
    pub const PRINCIPAL: StreamId = StreamId(3);
    /// State-of-nature generation.
    pub const STATES: StreamId = StreamId(4);
    /// Adversary-internal randomness (for randomised loss suites).
    pub const ADVERSARY: StreamId = StreamId(5);
    /// Base id for per-agent outcome sampling streams.
    pub const OUTCOME_BASE: StreamId = StreamId(100);

    /// A stream offset from `self` (e.g. one outcome stream per agent).
    pub fn offset(self, delta: u64) -> StreamId {
        StreamId(self.0.wrapping_add(delta))
    }
}

/// Identifier of a single recorded draw: which stream, and the index of the
/// draw within that stream. Enough to replay; raw bits are not stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawId {
    pub stream: StreamId,
    pub index: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic random stream keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: StreamId,
    draws: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: StreamId) -> Self {
        // Expand (seed, stream) into a full 256-bit key so that nearby seeds
        // and streams do not share cipher state.
        let mut state = seed ^ stream.0.wrapping_mul(0xA076_1D64_78BD_642F);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        SeededRng {
            seed,
            stream,
            draws: 0,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> StreamId {
        self.stream
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Identifier of the next draw (recorded in transcripts before drawing).
    pub fn next_draw_id(&self) -> DrawId {
        DrawId {
            stream: self.stream,
            index: self.draws,
        }
    }

    /// One uniform draw from `[0, 1)`. Advances the stream exactly once.
    pub fn next_unit(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    /// One uniform draw from `{0, 1, ..., n-1}`. Advances the stream exactly once.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.draws += 1;
        self.rng.random_range(0..n)
    }
}
