use rand::Rng;

use crate::algos::{uniform_action, Exploration, Policy};
use crate::envs::Env;
use crate::error::{Error, Result};
use crate::replay::{ReplayBuffer, Transition};

/// Returns of whole episodes played while filling the buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub returns: Vec<f64>,
    pub mean_score: f64,
    pub steps: u64,
}

/// Play `episodes` complete episodes with `actor`, storing every transition.
pub fn evaluate_and_collect<R: Rng + ?Sized>(
    actor: &Policy,
    env: &mut dyn Env,
    episodes: usize,
    exploration: Exploration,
    buffer: &mut ReplayBuffer,
    rng: &mut R,
) -> Result<Evaluation> {
    if episodes == 0 {
        return Err(Error::Config("need at least one episode".into()));
    }
    let mut returns = Vec::with_capacity(episodes);
    let mut steps = 0;
    for _ in 0..episodes {
        let mut state = env.reset(rng.random());
        let mut ret = 0.0;
        loop {
            let action = actor.explore(&state, exploration, rng)?;
            let r = env.step(&action)?;
            steps += 1;
            ret += r.reward;
            let done = r.done();
            buffer.push(Transition { state, action, reward: r.reward, next_state: r.next_state.clone(), terminal: r.terminated })?;
            if done {
                break;
            }
            state = r.next_state;
        }
        returns.push(ret);
    }
    let mean_score = returns.iter().sum::<f64>() / episodes as f64;
    Ok(Evaluation { returns, mean_score, steps })
}

/// Exactly `steps` uniform-random transitions; a trailing partial episode is
/// left unfinished.
pub fn collect_random<R: Rng + ?Sized>(env: &mut dyn Env, steps: u64, buffer: &mut ReplayBuffer, rng: &mut R) -> Result<u64> {
    let spec = env.spec();
    let mut state = env.reset(rng.random());
    for _ in 0..steps {
        let action = uniform_action(&spec, rng);
        let r = env.step(&action)?;
        let done = r.done();
        buffer.push(Transition { state, action, reward: r.reward, next_state: r.next_state.clone(), terminal: r.terminated })?;
        state = if done { env.reset(rng.random()) } else { r.next_state };
    }
    Ok(steps)
}
