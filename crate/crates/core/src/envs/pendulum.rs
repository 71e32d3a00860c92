use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{clip_action, Env, EnvSpec, EpisodeClock, StepResult};
use crate::error::Result;

const MAX_SPEED: f64 = 8.0;
const DT: f64 = 0.05;
const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;

/// Classic torque-limited pendulum swing-up. `theta = 0` is upright.
///
/// Observation `(cos theta, sin theta, theta_dot)`; initial `theta` uniform in
/// `[-pi, pi)` and `theta_dot` uniform in `[-1, 1)`. Never terminates early.
#[derive(Clone, Debug, Default)]
pub struct Pendulum {
    theta: f64,
    theta_dot: f64,
    clock: EpisodeClock,
}

/// Angle wrapped into `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

impl Pendulum {
    pub const SPEC: EnvSpec = EnvSpec { state_dim: 3, action_dim: 1, action_bound: 2.0, max_episode_steps: 200 };

    pub fn new() -> Self {
        Self::default()
    }

    /// Raw `(theta, theta_dot)`.
    pub fn state(&self) -> (f64, f64) {
        (self.theta, self.theta_dot)
    }

    /// Overwrite the physical state and start a fresh episode from it.
    pub fn set_state(&mut self, theta: f64, theta_dot: f64) -> Vec<f64> {
        self.theta = theta;
        self.theta_dot = theta_dot;
        self.clock.start();
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }
}

impl Env for Pendulum {
    fn spec(&self) -> EnvSpec {
        Self::SPEC
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = rng.random_range(-PI..PI);
        let theta_dot = rng.random_range(-1.0..1.0);
        self.set_state(theta, theta_dot)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.clock.check_action(action, &Self::SPEC)?;
        let u = clip_action(action, Self::SPEC.action_bound)[0];
        let (th, thdot) = (self.theta, self.theta_dot);
        let cost = wrap_angle(th).powi(2) + 0.1 * thdot * thdot + 0.001 * u * u;

        let accel = 3.0 * GRAVITY / (2.0 * LENGTH) * th.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u;
        let new_thdot = (thdot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta = th + new_thdot * DT;
        self.theta_dot = new_thdot;

        let truncated = self.clock.tick(false, &Self::SPEC);
        Ok(StepResult { next_state: self.observe(), reward: -cost, terminated: false, truncated })
    }
}
