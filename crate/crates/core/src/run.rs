//! Per-run configuration and seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Length of a run and how often it is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub total_steps: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { total_steps: 1_000_000, eval_interval: 5000, eval_episodes: 20 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 || self.eval_interval == 0 || self.eval_episodes == 0 {
            return Err(Error::Config(format!(
                "total_steps, eval_interval and eval_episodes must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Evaluation grid `interval, 2*interval, ... <= total_steps`.
    pub fn eval_steps(&self) -> Vec<u64> {
        (1..=self.total_steps / self.eval_interval).map(|k| k * self.eval_interval).collect()
    }
}

/// Independent ChaCha streams for one run, all derived from the run seed.
///
/// Keeping consumers on separate streams means, for example, that skipping the
/// lambda perturbation does not shift the minibatch draws.
#[derive(Clone, Debug)]
pub struct RunRngs {
    /// Network initialization.
    pub init: ChaCha8Rng,
    /// Episode seeds, warmup actions and exploration noise.
    pub collect: ChaCha8Rng,
    /// Minibatch draws, target noise, policy samples and ensemble subsets.
    pub train: ChaCha8Rng,
    /// Lambda perturbations.
    pub lambda: ChaCha8Rng,
    seed: u64,
}

impl RunRngs {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Self { init: stream(1), collect: stream(2), train: stream(3), lambda: stream(4), seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed for the `k`-th evaluation; independent of every training stream.
    pub fn eval_seed(&self, k: u64) -> u64 {
        let mut z = self.seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k + 1);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}
