//! Deterministic per-run random streams.
//!
//! Every run derives three independent ChaCha streams from `(master_seed, run)`:
//! contexts, rewards and policy randomization. Two policies evaluated on the
//! same run index therefore see the same context and reward draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PolicyRng = ChaCha8Rng;

const CONTEXT_STREAM: u64 = 0;
const REWARD_STREAM: u64 = 1;
const POLICY_STREAM: u64 = 2;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit seed for one run, stable across platforms and thread counts.
pub fn run_seed(master_seed: u64, run: u64) -> u64 {
    mix(mix(master_seed) ^ run.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// The three random streams owned by one episode.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub contexts: ChaCha8Rng,
    pub rewards: ChaCha8Rng,
    pub policy: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(master_seed: u64, run: u64) -> Self {
        let seed = run_seed(master_seed, run);
        let stream = |id| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            contexts: stream(CONTEXT_STREAM),
            rewards: stream(REWARD_STREAM),
            policy: stream(POLICY_STREAM),
        }
    }
}
