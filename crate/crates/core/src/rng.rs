//! Deterministic, counter-based randomness for Monte Carlo trials.
//!
//! [`TrialRng`] is a SplitMix64-style generator keyed by a `(seed,
//! stream_id)` pair. Identical pairs reproduce identical sequences, and
//! distinct streams use distinct odd increments, so trials can be split
//! across bits, sweep cells or threads without coordination.

/// Weyl increment of the reference SplitMix64 sequence.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalising mix of SplitMix64.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded, stream-splittable trial generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRng {
    /// Seed shared by every stream of one experiment.
    pub seed: u64,
    /// Stream selector, e.g. the trial or bit index.
    pub stream_id: u64,
    state: u64,
    gamma: u64,
}

impl TrialRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let state = mix64(seed ^ GOLDEN) ^ mix64(stream_id);
        let gamma = mix64(stream_id ^ seed.rotate_left(32)) | 1;
        Self {
            seed,
            stream_id,
            state,
            gamma,
        }
    }

    /// Derive a child stream, e.g. one per message bit. Children of
    /// distinct `(stream_id, index)` pairs are distinct streams.
    pub fn substream(&self, index: u64) -> Self {
        Self::new(
            self.seed,
            self.stream_id
                .wrapping_mul(0x0000_0100_0000_01B3)
                .wrapping_add(mix64(index)),
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
