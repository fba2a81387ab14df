//! Per-trial random streams.
//!
//! Each trial has one seed. Every source of randomness (the sample, the
//! parity coin, the bucketing, the binomial prefix length, reduction coins,
//! arrival orders) draws from its own ChaCha stream keyed by that seed, so a
//! trial replays bit-exactly and changing one source leaves the others intact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Sample,
    Parity,
    Bucketing,
    Prefix,
    Branch,
    Split,
    Order,
    Inner,
}

impl Stream {
    const COUNT: usize = 8;

    fn index(self) -> usize {
        self as usize
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under root seed `root`.
pub fn trial_seed(root: u64, trial: u64) -> u64 {
    mix64(root ^ mix64(trial))
}

pub struct TrialStreams {
    seed: u64,
    order_variant: u64,
    streams: [Option<ChaCha8Rng>; Stream::COUNT],
}

impl TrialStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            order_variant: 0,
            streams: Default::default(),
        }
    }

    /// Same seed, but the arrival-order stream is replaced by variant `k`.
    /// Used to resample phase-2 orders while keeping every other coin fixed.
    pub fn with_order_variant(seed: u64, k: u64) -> Self {
        Self {
            order_variant: k,
            ..Self::new(seed)
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&mut self, stream: Stream) -> &mut ChaCha8Rng {
        let (seed, variant) = (self.seed, self.order_variant);
        self.streams[stream.index()].get_or_insert_with(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let id = if stream == Stream::Order {
                Stream::COUNT as u64 + variant
            } else {
                stream.index() as u64
            };
            rng.set_stream(id);
            rng
        })
    }
}
