//! TD3, QMD3, SAC and REDQ update rules.
//!
//! The target rules take the next actions `a'` as an input so that callers
//! decide where they come from: an actor target, the trained actor itself,
//! or the dual-actor mix in [`crate::cic`].

mod actor;
mod baseline;
mod critics;
mod learner;
pub(crate) mod policy;
mod targets;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use actor::{actor_update_deterministic, actor_update_stochastic, StochasticStats, TemperatureState};
pub use baseline::{train_baseline, uniform_action, BaselineAgent, BaselineObserver, BaselineOutcome};
pub use critics::{critic_input, critic_update, CriticEnsemble, CriticMember};
pub use learner::{ActorCritic, UpdateStats};
pub use policy::{Exploration, Policy};
pub use targets::{
    lower_median, qmd3_target, redq_target, sac_target, smoothed_next_actions, td3_target, NextActions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    Td3,
    Qmd3,
    Sac,
    Redq,
}

impl AlgoKind {
    pub const ALL: [AlgoKind; 4] = [AlgoKind::Td3, AlgoKind::Qmd3, AlgoKind::Sac, AlgoKind::Redq];

    pub fn name(self) -> &'static str {
        match self {
            AlgoKind::Td3 => "td3",
            AlgoKind::Qmd3 => "qmd3",
            AlgoKind::Sac => "sac",
            AlgoKind::Redq => "redq",
        }
    }

    /// SAC and REDQ train a squashed-Gaussian actor.
    pub fn is_stochastic(self) -> bool {
        matches!(self, AlgoKind::Sac | AlgoKind::Redq)
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "td3" => Ok(AlgoKind::Td3),
            "qmd3" => Ok(AlgoKind::Qmd3),
            "sac" => Ok(AlgoKind::Sac),
            "redq" => Ok(AlgoKind::Redq),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Entropy target for the adaptive temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetEntropy {
    /// `-|A|`, the negative action dimension.
    NegActionDim,
    Fixed(f64),
}

impl TargetEntropy {
    pub fn resolve(self, action_dim: usize) -> f64 {
        match self {
            TargetEntropy::NegActionDim => -(action_dim as f64),
            TargetEntropy::Fixed(v) => v,
        }
    }
}

/// Hyperparameters of one base algorithm.
///
/// Optional fields are present exactly for the algorithms that use them.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgoHyper {
    pub algo: AlgoKind,
    pub num_critics: usize,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub delay_frequency: Option<usize>,
    pub exploration_noise_std: Option<f64>,
    pub target_policy_noise_std: Option<f64>,
    pub policy_noise_clip: Option<(f64, f64)>,
    pub target_entropy: Option<TargetEntropy>,
    pub log_std_clip: Option<(f64, f64)>,
    pub ensemble_subset_size: Option<usize>,
    pub warmup_steps: u64,
    pub utd_ratio: usize,
    /// Whether the baseline keeps a Polyak-averaged actor target.
    pub actor_target: bool,
    pub hidden_sizes: Vec<usize>,
    pub replay_capacity: usize,
}

impl AlgoHyper {
    pub fn defaults(algo: AlgoKind) -> Self {
        let deterministic = !algo.is_stochastic();
        Self {
            algo,
            num_critics: match algo {
                AlgoKind::Td3 | AlgoKind::Sac => 2,
                AlgoKind::Qmd3 => 4,
                AlgoKind::Redq => 10,
            },
            gamma: 0.99,
            tau: 5e-3,
            batch_size: 256,
            learning_rate: 3e-4,
            delay_frequency: deterministic.then_some(2),
            exploration_noise_std: deterministic.then_some(0.1),
            target_policy_noise_std: deterministic.then_some(0.2),
            policy_noise_clip: deterministic.then_some((-0.5, 0.5)),
            target_entropy: (!deterministic).then_some(TargetEntropy::NegActionDim),
            log_std_clip: (!deterministic).then_some((-20.0, 2.0)),
            ensemble_subset_size: (algo == AlgoKind::Redq).then_some(2),
            warmup_steps: match algo {
                AlgoKind::Td3 | AlgoKind::Qmd3 => 25_000,
                AlgoKind::Sac => 10_000,
                AlgoKind::Redq => 5000,
            },
            utd_ratio: 1,
            actor_target: deterministic,
            hidden_sizes: vec![64, 64],
            replay_capacity: crate::replay::ReplayBuffer::DEFAULT_CAPACITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.algo)));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma {} outside [0, 1]", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau {} outside [0, 1]", self.tau));
        }
        if self.batch_size == 0 || self.utd_ratio == 0 || self.replay_capacity == 0 {
            return bad("batch size, UTD ratio and replay capacity must be positive".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layers must be non-empty".into());
        }
        let det = !self.algo.is_stochastic();
        let checks = [
            ("delay_frequency", self.delay_frequency.is_some(), det),
            ("exploration_noise_std", self.exploration_noise_std.is_some(), det),
            ("target_policy_noise_std", self.target_policy_noise_std.is_some(), det),
            ("policy_noise_clip", self.policy_noise_clip.is_some(), det),
            ("target_entropy", self.target_entropy.is_some(), !det),
            ("log_std_clip", self.log_std_clip.is_some(), !det),
            ("ensemble_subset_size", self.ensemble_subset_size.is_some(), self.algo == AlgoKind::Redq),
        ];
        for (name, present, wanted) in checks {
            if present != wanted {
                let what = if wanted { "requires" } else { "does not use" };
                return bad(format!("{what} {name}"));
            }
        }
        if self.actor_target && !det {
            return bad("stochastic actors have no actor target".into());
        }
        if self.delay_frequency == Some(0) {
            return bad("delay frequency must be positive".into());
        }
        if let Some((lo, hi)) = self.policy_noise_clip {
            if !(lo <= hi) {
                return bad(format!("policy noise clip [{lo}, {hi}] is empty"));
            }
        }
        if let Some((lo, hi)) = self.log_std_clip {
            if !(lo < hi) {
                return bad(format!("log-std clip [{lo}, {hi}] is empty"));
            }
        }
        if let Some(std) = self.exploration_noise_std.into_iter().chain(self.target_policy_noise_std).find(|s| !(*s >= 0.0)) {
            return bad(format!("noise std {std} must be non-negative"));
        }
        match self.algo {
            AlgoKind::Td3 | AlgoKind::Sac if self.num_critics != 2 => bad(format!("needs exactly 2 critics, got {}", self.num_critics)),
            AlgoKind::Qmd3 if self.num_critics < 2 => bad(format!("needs at least 2 critics, got {}", self.num_critics)),
            AlgoKind::Redq => {
                let m = self.ensemble_subset_size.unwrap_or(0);
                if m == 0 || m > self.num_critics {
                    bad(format!("subset size {m} must lie in 1..={}", self.num_critics))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Whether the `k`-th critic update (1-based) is followed by an actor update.
    pub fn actor_update_due(&self, critic_updates: u64) -> bool {
        self.delay_frequency.is_none_or(|d| critic_updates.is_multiple_of(d as u64))
    }
}
