use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{clip_action, Env, EnvSpec, EpisodeClock, StepResult};
use crate::error::Result;

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POSITION: f64 = 0.45;
const POWER: f64 = 0.0015;

/// Continuous mountain car: reach `x >= 0.45` with non-negative velocity.
///
/// Reward is `-0.1 * u^2` per step plus 100 on reaching the goal, which
/// terminates the episode. Initial position uniform in `[-0.6, -0.4)`, at rest.
#[derive(Clone, Debug, Default)]
pub struct MountainCar {
    position: f64,
    velocity: f64,
    clock: EpisodeClock,
}

impl MountainCar {
    pub const SPEC: EnvSpec = EnvSpec { state_dim: 2, action_dim: 1, action_bound: 1.0, max_episode_steps: 999 };

    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_state(&mut self, position: f64, velocity: f64) -> Vec<f64> {
        self.position = position;
        self.velocity = velocity;
        self.clock.start();
        vec![position, velocity]
    }
}

impl Env for MountainCar {
    fn spec(&self) -> EnvSpec {
        Self::SPEC
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let position = rng.random_range(-0.6..-0.4);
        self.set_state(position, 0.0)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.clock.check_action(action, &Self::SPEC)?;
        let force = clip_action(action, Self::SPEC.action_bound)[0];

        let mut velocity = self.velocity + force * POWER - 0.0025 * (3.0 * self.position).cos();
        velocity = velocity.clamp(-MAX_SPEED, MAX_SPEED);
        let position = (self.position + velocity).clamp(MIN_POSITION, MAX_POSITION);
        if position == MIN_POSITION && velocity < 0.0 {
            velocity = 0.0;
        }
        self.position = position;
        self.velocity = velocity;

        let terminated = position >= GOAL_POSITION && velocity >= 0.0;
        let mut reward = -0.1 * force * force;
        if terminated {
            reward += 100.0;
        }
        let truncated = self.clock.tick(terminated, &Self::SPEC);
        Ok(StepResult { next_state: vec![position, velocity], reward, terminated, truncated })
    }
}
