use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::algos::policy::standard_normal;
use crate::algos::{ActorCritic, NextActions, Policy};
use crate::error::{Error, Result};

/// The frozen representative `actor1` next to the learner whose actor is `actor2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualActor {
    pub actor1: Policy,
    pub learner: ActorCritic,
}

impl DualActor {
    /// Both actors start from the same parameters.
    pub fn new(learner: ActorCritic) -> Self {
        Self { actor1: learner.actor.clone(), learner }
    }

    pub fn actor2(&self) -> &Policy {
        &self.learner.actor
    }
}

/// Episode returns backing the promotion test.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreHistory {
    /// Every evaluation of the current actor1, including inherited ones.
    pub actor1_scores: Vec<f64>,
    pub actor1_episodes_played: usize,
    /// Returns of actor2's latest round.
    pub actor2_scores: Vec<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl ScoreHistory {
    pub fn actor1_mean(&self) -> Option<f64> {
        mean(&self.actor1_scores)
    }

    pub fn actor2_mean(&self) -> Option<f64> {
        mean(&self.actor2_scores)
    }
}

/// Copy actor2 into actor1 when actor2's latest mean beats actor1's mean.
///
/// On promotion actor1's history becomes actor2's round, so the new actor1
/// counts as having played those episodes. Returns whether it promoted.
pub fn maybe_promote(dual: &mut DualActor, history: &mut ScoreHistory) -> bool {
    let (Some(m1), Some(m2)) = (history.actor1_mean(), history.actor2_mean()) else {
        return false;
    };
    if m1 >= m2 {
        return false;
    }
    dual.actor1 = dual.learner.actor.clone();
    history.actor1_scores = history.actor2_scores.clone();
    history.actor1_episodes_played = history.actor2_scores.len();
    true
}

/// Rows of an `n`-row batch whose next action comes from actor1.
pub fn actor1_rows(n: usize, lambda: f64) -> usize {
    ((n as f64 * lambda).floor() as usize).min(n)
}

/// Next actions for a batch: rows `[0, k)` from actor1, rows `[k, n)` from
/// actor2, with `k = actor1_rows(n, lambda)`.
///
/// Stochastic policies consume one full `n x |A|` noise matrix before the
/// split, so the draw count does not depend on `lambda`.
pub fn mixed_next_actions<R: Rng + ?Sized>(
    next_states: ArrayView2<f64>,
    lambda: f64,
    actor1: &Policy,
    actor2: &Policy,
    rng: &mut R,
) -> Result<(NextActions, usize)> {
    if actor1.is_stochastic() != actor2.is_stochastic() || actor1.action_dim() != actor2.action_dim() {
        return Err(Error::Contract("actor1 and actor2 must share a policy class".into()));
    }
    let n = next_states.nrows();
    let k = actor1_rows(n, lambda);
    let (head, tail) = (next_states.slice(s![..k, ..]), next_states.slice(s![k.., ..]));
    if actor2.is_stochastic() {
        let noise = standard_normal((n, actor2.action_dim()), rng);
        let part = |actor: &Policy, states: ArrayView2<f64>, rows: std::ops::Range<usize>| -> Result<(Array2<f64>, Array1<f64>)> {
            if rows.is_empty() {
                return Ok((Array2::zeros((0, actor.action_dim())), Array1::zeros(0)));
            }
            let smp = actor.sample_with_noise(states, noise.slice(s![rows, ..]))?;
            Ok((smp.action, smp.log_prob))
        };
        let (a1, l1) = part(actor1, head, 0..k)?;
        let (a2, l2) = part(actor2, tail, k..n)?;
        let actions = join_rows(a1, a2);
        let log_probs = if k == 0 { l2 } else if k == n { l1 } else { concatenate(Axis(0), &[l1.view(), l2.view()]).expect("1-d") };
        return Ok((NextActions { actions, log_probs: Some(log_probs) }, k));
    }
    let a1 = if k > 0 { actor1.mean_actions(head)? } else { Array2::zeros((0, actor1.action_dim())) };
    let a2 = if k < n { actor2.mean_actions(tail)? } else { Array2::zeros((0, actor2.action_dim())) };
    Ok((NextActions::deterministic(join_rows(a1, a2)), k))
}

fn join_rows(a: Array2<f64>, b: Array2<f64>) -> Array2<f64> {
    if a.nrows() == 0 {
        return b;
    }
    if b.nrows() == 0 {
        return a;
    }
    concatenate(Axis(0), &[a.view(), b.view()]).expect("equal column counts")
}
