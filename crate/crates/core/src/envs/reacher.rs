use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{clip_action, Env, EnvSpec, EpisodeClock, StepResult};
use crate::error::Result;

const DT: f64 = 0.05;
const DAMPING: f64 = 0.1;
const ARENA: f64 = 1.0;
const MAX_SPEED: f64 = 2.0;

/// Planar point mass (double integrator) steered toward a random goal.
///
/// State `(x, y, vx, vy, goal_x, goal_y)`. The agent starts at rest with its
/// position uniform in `[-0.5, 0.5)^2`; the goal is uniform in `[-1, 1)^2`.
/// Positions stay inside the `[-1, 1]^2` arena. Reward is the negative distance
/// to the goal after the step. Runs a fixed 100 steps.
#[derive(Clone, Debug, Default)]
pub struct PointReacher {
    pos: [f64; 2],
    vel: [f64; 2],
    goal: [f64; 2],
    clock: EpisodeClock,
}

impl PointReacher {
    pub const SPEC: EnvSpec = EnvSpec { state_dim: 6, action_dim: 2, action_bound: 1.0, max_episode_steps: 100 };

    pub fn new() -> Self {
        Self::default()
    }

    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    fn observe(&self) -> Vec<f64> {
        vec![self.pos[0], self.pos[1], self.vel[0], self.vel[1], self.goal[0], self.goal[1]]
    }
}

impl Env for PointReacher {
    fn spec(&self) -> EnvSpec {
        Self::SPEC
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.pos = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        self.vel = [0.0, 0.0];
        self.goal = [rng.random_range(-ARENA..ARENA), rng.random_range(-ARENA..ARENA)];
        self.clock.start();
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.clock.check_action(action, &Self::SPEC)?;
        let force = clip_action(action, Self::SPEC.action_bound);
        for d in 0..2 {
            let v = (self.vel[d] * (1.0 - DAMPING * DT) + force[d] * DT * 4.0).clamp(-MAX_SPEED, MAX_SPEED);
            let p = self.pos[d] + v * DT;
            if p.abs() > ARENA {
                self.pos[d] = p.clamp(-ARENA, ARENA);
                self.vel[d] = 0.0;
            } else {
                self.pos[d] = p;
                self.vel[d] = v;
            }
        }
        let dist = ((self.pos[0] - self.goal[0]).powi(2) + (self.pos[1] - self.goal[1]).powi(2)).sqrt();
        let truncated = self.clock.tick(false, &Self::SPEC);
        Ok(StepResult { next_state: self.observe(), reward: -dist, terminated: false, truncated })
    }
}
