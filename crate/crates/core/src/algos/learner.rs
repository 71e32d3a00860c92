use ndarray::{Array1, ArrayView2};
use rand::Rng;

use super::actor::{actor_update_deterministic, actor_update_stochastic, TemperatureState};
use super::critics::{critic_update, CriticEnsemble};
use super::policy::{Exploration, Policy};
use super::targets::{qmd3_target, redq_target, sac_target, td3_target, NextActions};
use super::{AlgoHyper, AlgoKind};
use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::numkit::{AdamConfig, AdamState};
use crate::replay::Batch;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_updated: bool,
}

/// Trained actor, critic ensemble and (for SAC/REDQ) temperature of one run.
///
/// [`update`](Self::update) is one gradient iteration given next actions
/// chosen by the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorCritic {
    pub hyper: AlgoHyper,
    pub env: EnvSpec,
    pub actor: Policy,
    pub actor_optim: AdamState,
    pub critics: CriticEnsemble,
    pub temperature: Option<TemperatureState>,
    pub critic_updates: u64,
}

impl ActorCritic {
    /// Draws the actor first, then the critics, from `rng`.
    pub fn new<R: Rng + ?Sized>(hyper: AlgoHyper, env: EnvSpec, rng: &mut R) -> Result<Self> {
        hyper.validate()?;
        let actor = match hyper.log_std_clip {
            Some(clip) => Policy::gaussian(&env, &hyper.hidden_sizes, clip, rng)?,
            None => Policy::deterministic(&env, &hyper.hidden_sizes, rng)?,
        };
        let critics =
            CriticEnsemble::new(hyper.num_critics, env.state_dim, env.action_dim, &hyper.hidden_sizes, hyper.learning_rate, rng)?;
        let actor_optim = AdamState::new(&actor.net.params, AdamConfig::with_lr(hyper.learning_rate));
        let temperature = hyper.target_entropy.map(|t| TemperatureState::new(t.resolve(env.action_dim), hyper.learning_rate));
        Ok(Self { hyper, env, actor, actor_optim, critics, temperature, critic_updates: 0 })
    }

    /// How the trained actor collects data.
    pub fn exploration(&self) -> Exploration {
        match self.hyper.exploration_noise_std {
            Some(std) => Exploration::Gaussian(std),
            None => Exploration::Sample,
        }
    }

    /// `policy` as the source of next actions: its deterministic output, or a
    /// sample with log-probability for stochastic policies.
    pub fn next_actions_from<R: Rng + ?Sized>(policy: &Policy, next_states: ArrayView2<f64>, rng: &mut R) -> Result<NextActions> {
        if policy.is_stochastic() {
            let (actions, logp) = policy.sample_actions(next_states, rng)?;
            Ok(NextActions { actions, log_probs: Some(logp) })
        } else {
            Ok(NextActions::deterministic(policy.mean_actions(next_states)?))
        }
    }

    fn alpha(&self) -> Result<f64> {
        self.temperature.as_ref().map(TemperatureState::alpha).ok_or_else(|| Error::Config("missing temperature".into()))
    }

    /// Bootstrapped critic targets for the configured algorithm.
    pub fn targets<R: Rng + ?Sized>(&self, batch: &Batch, next: &NextActions, rng: &mut R) -> Result<Array1<f64>> {
        let bound = self.env.action_bound;
        match self.hyper.algo {
            AlgoKind::Td3 => td3_target(batch, next, &self.critics, &self.hyper, bound, rng),
            AlgoKind::Qmd3 => qmd3_target(batch, next, &self.critics, &self.hyper, bound, rng),
            AlgoKind::Sac => sac_target(batch, next, &self.critics, self.alpha()?, &self.hyper),
            AlgoKind::Redq => Ok(redq_target(batch, next, &self.critics, self.alpha()?, &self.hyper, rng)?.0),
        }
    }

    /// Critic step, scheduled actor (and temperature) step, then Polyak
    /// update of every critic target.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch, next: &NextActions, rng: &mut R) -> Result<UpdateStats> {
        let y = self.targets(batch, next, rng)?;
        let critic_loss = critic_update(&mut self.critics, batch, y.view())?;
        self.critic_updates += 1;
        let actor_updated = self.hyper.actor_update_due(self.critic_updates);
        if actor_updated {
            match self.temperature.as_mut() {
                Some(temp) => {
                    actor_update_stochastic(&mut self.actor, &mut self.actor_optim, &self.critics, temp, batch, &self.hyper, rng)?;
                }
                None => {
                    actor_update_deterministic(&mut self.actor, &mut self.actor_optim, &self.critics, batch)?;
                }
            }
        }
        self.critics.soft_update_targets(self.hyper.tau)?;
        Ok(UpdateStats { critic_loss, actor_updated })
    }
}
