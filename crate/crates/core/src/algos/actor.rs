use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;

use super::critics::{critic_input, CriticEnsemble};
use super::policy::{standard_normal, Policy};
use super::{AlgoHyper, AlgoKind};
use crate::error::{Error, Result};
use crate::numkit::{squashed_backward, squashed_sample, AdamConfig, AdamState, ScalarAdam};
use crate::par;
use crate::replay::Batch;

/// Adaptive entropy temperature, `alpha = exp(log_alpha)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureState {
    pub log_alpha: f64,
    pub optim: ScalarAdam,
    pub target_entropy: f64,
}

impl TemperatureState {
    pub fn new(target_entropy: f64, learning_rate: f64) -> Self {
        Self { log_alpha: 0.0, optim: ScalarAdam::new(AdamConfig::with_lr(learning_rate)), target_entropy }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// One step on `-log_alpha * mean(log_prob + target_entropy)`.
    pub fn update(&mut self, mean_log_prob: f64) -> Result<()> {
        let grad = -(mean_log_prob + self.target_entropy);
        self.optim.apply(&mut self.log_alpha, grad)
    }
}

/// One Adam step on `mean(-Q_1(s, pi(s)))`, the gradient flowing through the
/// action into the actor. Returns the loss before the step.
pub fn actor_update_deterministic(
    actor: &mut Policy,
    optim: &mut AdamState,
    ensemble: &CriticEnsemble,
    batch: &Batch,
) -> Result<f64> {
    let critic = &ensemble.members.first().ok_or_else(|| Error::Config("empty critic ensemble".into()))?.online;
    let state_dim = batch.states.ncols();
    let n = batch.len() as f64;

    let actor_trace = actor.net.forward_traced(batch.states.view())?;
    let x = critic_input(batch.states.view(), actor_trace.output.view());
    let q_trace = critic.forward_traced(x.view())?;
    let loss = -q_trace.output.sum() / n;

    let upstream = Array2::from_elem((batch.len(), 1), -1.0 / n);
    let (_, dx) = critic.backward(&q_trace, upstream.view(), false)?;
    let d_action = dx.slice(s![.., state_dim..]);
    let (grads, _) = actor.net.backward(&actor_trace, d_action, true)?;
    optim.apply(&mut actor.net.params, &grads.expect("requested"))?;
    Ok(loss)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StochasticStats {
    pub actor_loss: f64,
    pub mean_log_prob: f64,
    pub alpha: f64,
}

/// One Adam step on `mean(alpha * log pi(a|s) - Qbar(s, a))` with `a` a
/// reparameterized sample, then one temperature step with `log pi` held fixed.
///
/// `Qbar` is the minimum over critics for SAC and the ensemble mean for REDQ.
pub fn actor_update_stochastic<R: Rng + ?Sized>(
    actor: &mut Policy,
    optim: &mut AdamState,
    ensemble: &CriticEnsemble,
    temperature: &mut TemperatureState,
    batch: &Batch,
    hyper: &AlgoHyper,
    rng: &mut R,
) -> Result<StochasticStats> {
    let use_min = match hyper.algo {
        AlgoKind::Sac => true,
        AlgoKind::Redq => false,
        other => return Err(Error::Config(format!("{other} does not train a stochastic actor"))),
    };
    let (rows, state_dim) = batch.states.dim();
    let n = rows as f64;
    let q_count = ensemble.len();
    let alpha = temperature.alpha();

    let actor_trace = actor.net.forward_traced(batch.states.view())?;
    let noise = standard_normal((rows, actor.action_dim()), rng);
    let sample = squashed_sample(actor_trace.output.view(), noise.view(), actor.action_bound);
    let x = critic_input(batch.states.view(), sample.action.view());

    let traces = par::map(&ensemble.members, |m| m.online.forward_traced(x.view()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    // Per-row weight of every critic in Qbar.
    let mut weights = Array2::<f64>::zeros((q_count, rows));
    let mut q_bar = Array1::<f64>::zeros(rows);
    for r in 0..rows {
        if use_min {
            let (best, value) = traces
                .iter()
                .enumerate()
                .map(|(c, t)| (c, t.output[[r, 0]]))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            weights[[best, r]] = 1.0;
            q_bar[r] = value;
        } else {
            weights.column_mut(r).fill(1.0 / q_count as f64);
            q_bar[r] = traces.iter().map(|t| t.output[[r, 0]]).sum::<f64>() / q_count as f64;
        }
    }
    let actor_loss = (alpha * &sample.log_prob - &q_bar).sum() / n;
    let mean_log_prob = sample.log_prob.sum() / n;

    let members: Vec<usize> = (0..q_count).collect();
    let action_grads = par::map(&members, |&c| -> Result<Array2<f64>> {
        let up = weights.row(c).mapv(|w| -w / n).insert_axis(Axis(1));
        let (_, dx) = ensemble.members[c].online.backward(&traces[c], up.view(), false)?;
        Ok(dx.slice(s![.., state_dim..]).to_owned())
    });
    let mut d_action = Array2::<f64>::zeros(sample.action.raw_dim());
    for g in action_grads {
        d_action += &g?;
    }
    let d_log_prob = Array1::from_elem(rows, alpha / n);
    let head_grad = squashed_backward(&sample, d_action.view(), d_log_prob.view(), actor.action_bound);
    let (grads, _) = actor.net.backward(&actor_trace, head_grad.view(), true)?;
    optim.apply(&mut actor.net.params, &grads.expect("requested"))?;

    temperature.update(mean_log_prob)?;
    Ok(StochasticStats { actor_loss, mean_log_prob, alpha })
}
