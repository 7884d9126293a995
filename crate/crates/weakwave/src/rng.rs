//! Counter-keyed deterministic random numbers.
//!
//! Each draw is a pure function of `(seed, index)` built on the SplitMix64
//! finalizer, so a sampling job can be partitioned across any number of
//! workers and still produce bitwise-identical streams.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A stateless generator addressed by draw index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: mix(seed.wrapping_add(GOLDEN_GAMMA)),
        }
    }

    /// An independent stream for trial or task `stream` under the same seed.
    pub fn substream(&self, stream: u64) -> Self {
        CounterRng {
            key: mix(self.key ^ mix(stream.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1))),
        }
    }

    /// The `index`-th uniform variate in `[0, 1)`, with 53 random mantissa bits.
    pub fn uniform(&self, index: u64) -> f64 {
        let word = mix(self.key.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)));
        (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// A per-trial seed derived from a master seed, decorrelated across both
/// arguments.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    CounterRng::new(seed).substream(stream).key
}
