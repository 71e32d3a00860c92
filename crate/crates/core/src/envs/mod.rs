//! Seedable continuous-control environments behind one contract.
//!
//! Actions are clipped to the symmetric action box inside `step`, so noisy
//! exploration never fails a rollout. `reset` draws the initial state from a
//! generator seeded only by its argument.

mod mountain_car;
mod pendulum;
mod reacher;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use mountain_car::MountainCar;
pub use pendulum::Pendulum;
pub use reacher::PointReacher;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_bound: f64,
    pub max_episode_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub next_state: Vec<f64>,
    pub reward: f64,
    /// Environment-defined end (goal or failure); not set by the step limit.
    pub terminated: bool,
    /// Step limit reached.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Env: Send {
    fn spec(&self) -> EnvSpec;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

impl<E: Env + ?Sized> Env for Box<E> {
    fn spec(&self) -> EnvSpec {
        (**self).spec()
    }
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        (**self).step(action)
    }
}

/// Anything that maps a state to an action (a policy evaluated greedily).
pub trait Controller {
    fn act(&self, state: &[f64]) -> Vec<f64>;
}

impl<F: Fn(&[f64]) -> Vec<f64>> Controller for F {
    fn act(&self, state: &[f64]) -> Vec<f64> {
        self(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvKind {
    Pendulum,
    MountainCar,
    PointReacher,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::Pendulum, EnvKind::MountainCar, EnvKind::PointReacher];

    pub fn make(self) -> Box<dyn Env> {
        match self {
            EnvKind::Pendulum => Box::new(Pendulum::new()),
            EnvKind::MountainCar => Box::new(MountainCar::new()),
            EnvKind::PointReacher => Box::new(PointReacher::new()),
        }
    }

    pub fn spec(self) -> EnvSpec {
        match self {
            EnvKind::Pendulum => Pendulum::SPEC,
            EnvKind::MountainCar => MountainCar::SPEC,
            EnvKind::PointReacher => PointReacher::SPEC,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Pendulum => "pendulum",
            EnvKind::MountainCar => "mountain-car",
            EnvKind::PointReacher => "point-reacher",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "pendulum" => Ok(EnvKind::Pendulum),
            "mountain-car" | "mountaincar" => Ok(EnvKind::MountainCar),
            "point-reacher" | "reacher" => Ok(EnvKind::PointReacher),
            other => Err(Error::Config(format!("unknown environment '{other}'"))),
        }
    }
}

/// Step bookkeeping shared by the environments.
#[derive(Clone, Debug, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    live: bool,
}

impl EpisodeClock {
    pub(crate) fn start(&mut self) {
        self.steps = 0;
        self.live = true;
    }

    pub(crate) fn check_action(&self, action: &[f64], spec: &EnvSpec) -> Result<()> {
        if !self.live {
            return Err(Error::Contract("step called on a finished or unreset episode".into()));
        }
        if action.len() != spec.action_dim {
            return Err(Error::DimensionMismatch { context: "env action", expected: spec.action_dim, got: action.len() });
        }
        Ok(())
    }

    /// Advance one step; returns the truncation flag.
    pub(crate) fn tick(&mut self, terminated: bool, spec: &EnvSpec) -> bool {
        self.steps += 1;
        let truncated = self.steps >= spec.max_episode_steps;
        if terminated || truncated {
            self.live = false;
        }
        truncated
    }

    #[cfg(test)]
    pub(crate) fn steps(&self) -> usize {
        self.steps
    }
}

pub(crate) fn clip_action(action: &[f64], bound: f64) -> Vec<f64> {
    action.iter().map(|a| a.clamp(-bound, bound)).collect()
}
