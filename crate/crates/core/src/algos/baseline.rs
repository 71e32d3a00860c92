//! Step-wise training loop for the plain algorithms: one environment step,
//! then `utd_ratio` gradient iterations once warmup is over.

use rand::Rng;

use super::learner::{ActorCritic, UpdateStats};
use super::policy::Policy;
use super::targets::NextActions;
use super::AlgoHyper;
use crate::envs::{EnvKind, EnvSpec};
use crate::error::Result;
use crate::metrics::{eval_policy, LearningCurve};
use crate::numkit::soft_update;
use crate::replay::{ReplayBuffer, Transition};
use crate::run::{RunConfig, RunRngs};

/// A base algorithm with its optional Polyak-averaged actor target.
#[derive(Clone, Debug)]
pub struct BaselineAgent {
    pub learner: ActorCritic,
    pub actor_target: Option<Policy>,
}

impl BaselineAgent {
    pub fn new<R: Rng + ?Sized>(hyper: AlgoHyper, env: EnvSpec, rng: &mut R) -> Result<Self> {
        let with_target = hyper.actor_target;
        let learner = ActorCritic::new(hyper, env, rng)?;
        let actor_target = with_target.then(|| learner.actor.clone());
        Ok(Self { learner, actor_target })
    }

    /// Sample a minibatch and run one gradient iteration.
    pub fn gradient_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<UpdateStats> {
        let batch = buffer.sample_batch(self.learner.hyper.batch_size, rng)?;
        let next = match &self.actor_target {
            Some(target) => NextActions::deterministic(target.mean_actions(batch.next_states.view())?),
            None => ActorCritic::next_actions_from(&self.learner.actor, batch.next_states.view(), rng)?,
        };
        let stats = self.learner.update(&batch, &next, rng)?;
        if stats.actor_updated {
            if let Some(target) = self.actor_target.as_mut() {
                soft_update(&mut target.net.params, &self.learner.actor.net.params, self.learner.hyper.tau)?;
            }
        }
        Ok(stats)
    }
}

/// Invoked after every gradient iteration of [`train_baseline`].
pub trait BaselineObserver {
    fn on_gradient_step(&mut self, _iteration: u64, _agent: &BaselineAgent) {}
}

impl BaselineObserver for () {}

#[derive(Clone, Debug)]
pub struct BaselineOutcome {
    pub actor: Policy,
    pub curve: LearningCurve,
    pub gradient_steps: u64,
    pub env_steps: u64,
}

pub fn train_baseline(
    hyper: AlgoHyper,
    env_kind: EnvKind,
    run: &RunConfig,
    seed: u64,
    observer: &mut dyn BaselineObserver,
) -> Result<BaselineOutcome> {
    run.validate()?;
    let mut rngs = RunRngs::new(seed);
    let spec = env_kind.spec();
    let mut agent = BaselineAgent::new(hyper, spec, &mut rngs.init)?;
    let hyper = agent.learner.hyper.clone();
    let exploration = agent.learner.exploration();
    let mut buffer = ReplayBuffer::new(hyper.replay_capacity, spec.state_dim, spec.action_dim)?;
    let mut curve = LearningCurve::new(run.eval_interval, run.eval_episodes);
    let mut env = env_kind.make();
    let mut state = env.reset(rngs.collect.random());
    let mut gradient_steps = 0;

    for t in 0..run.total_steps {
        let action = if t < hyper.warmup_steps {
            uniform_action(&spec, &mut rngs.collect)
        } else {
            agent.learner.actor.explore(&state, exploration, &mut rngs.collect)?
        };
        let r = env.step(&action)?;
        let done = r.done();
        buffer.push(Transition {
            state,
            action,
            reward: r.reward,
            next_state: r.next_state.clone(),
            terminal: r.terminated,
        })?;
        state = if done { env.reset(rngs.collect.random()) } else { r.next_state };

        if t >= hyper.warmup_steps {
            for _ in 0..hyper.utd_ratio {
                agent.gradient_step(&buffer, &mut rngs.train)?;
                gradient_steps += 1;
                observer.on_gradient_step(gradient_steps, &agent);
            }
        }
        let steps_done = t + 1;
        if steps_done % run.eval_interval == 0 {
            let k = steps_done / run.eval_interval;
            let score = eval_policy(&agent.learner.actor, || env_kind.make(), run.eval_episodes, rngs.eval_seed(k))?;
            curve.push(steps_done, score);
        }
    }
    Ok(BaselineOutcome { actor: agent.learner.actor, curve, gradient_steps, env_steps: run.total_steps })
}

/// Uniform draw over the action box.
pub fn uniform_action<R: Rng + ?Sized>(spec: &EnvSpec, rng: &mut R) -> Vec<f64> {
    (0..spec.action_dim).map(|_| rng.random_range(-spec.action_bound..=spec.action_bound)).collect()
}
