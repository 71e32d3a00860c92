use ndarray::{Array1, Array2, ArrayView2};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::critics::CriticEnsemble;
use super::AlgoHyper;
use crate::error::{Error, Result};
use crate::replay::Batch;

/// Next actions `a'` for every batch row, plus their log-probabilities when
/// they were sampled from a stochastic actor.
#[derive(Clone, Debug, PartialEq)]
pub struct NextActions {
    pub actions: Array2<f64>,
    pub log_probs: Option<Array1<f64>>,
}

impl NextActions {
    pub fn deterministic(actions: Array2<f64>) -> Self {
        Self { actions, log_probs: None }
    }
}

/// Target policy smoothing: `clip(a' + clip(eps, noise_clip), -bound, bound)`
/// with `eps ~ N(0, std^2)` drawn row-major.
pub fn smoothed_next_actions<R: Rng + ?Sized>(
    actions: ArrayView2<f64>,
    noise_std: f64,
    noise_clip: (f64, f64),
    action_bound: f64,
    rng: &mut R,
) -> Array2<f64> {
    let mut out = actions.to_owned();
    for a in out.iter_mut() {
        let eps: f64 = rng.sample(StandardNormal);
        let eps = (noise_std * eps).clamp(noise_clip.0, noise_clip.1);
        *a = (*a + eps).clamp(-action_bound, action_bound);
    }
    out
}

/// The `floor(q/2)`-th smallest value (1-based). Reorders `values`.
pub fn lower_median(values: &mut [f64]) -> f64 {
    assert!(values.len() >= 2, "order statistic needs at least two values");
    values.sort_by(f64::total_cmp);
    values[values.len() / 2 - 1]
}

fn bootstrap(batch: &Batch, gamma: f64, next_value: impl Fn(usize) -> f64) -> Array1<f64> {
    Array1::from_shape_fn(batch.len(), |i| batch.rewards[i] + gamma * batch.not_done[i] * next_value(i))
}

fn check_rows(batch: &Batch, next: &NextActions) -> Result<()> {
    if next.actions.nrows() != batch.len() {
        return Err(Error::DimensionMismatch { context: "next actions", expected: batch.len(), got: next.actions.nrows() });
    }
    Ok(())
}

fn smoothing(hyper: &AlgoHyper) -> Result<(f64, (f64, f64))> {
    match (hyper.target_policy_noise_std, hyper.policy_noise_clip) {
        (Some(std), Some(clip)) => Ok((std, clip)),
        _ => Err(Error::Config(format!("{} has no target policy smoothing settings", hyper.algo))),
    }
}

/// Twin-critic target `r + gamma * (1 - d) * min(Q'_1, Q'_2)(s', a~')`.
pub fn td3_target<R: Rng + ?Sized>(
    batch: &Batch,
    next: &NextActions,
    ensemble: &CriticEnsemble,
    hyper: &AlgoHyper,
    action_bound: f64,
    rng: &mut R,
) -> Result<Array1<f64>> {
    if ensemble.len() != 2 {
        return Err(Error::Config(format!("twin-critic target needs 2 critics, got {}", ensemble.len())));
    }
    check_rows(batch, next)?;
    let (std, clip) = smoothing(hyper)?;
    let smoothed = smoothed_next_actions(next.actions.view(), std, clip, action_bound, rng);
    let q = ensemble.target_values(batch.next_states.view(), smoothed.view())?;
    Ok(bootstrap(batch, hyper.gamma, |i| q[0][i].min(q[1][i])))
}

/// Order-statistic target: the `floor(q/2)`-th smallest target-critic value.
pub fn qmd3_target<R: Rng + ?Sized>(
    batch: &Batch,
    next: &NextActions,
    ensemble: &CriticEnsemble,
    hyper: &AlgoHyper,
    action_bound: f64,
    rng: &mut R,
) -> Result<Array1<f64>> {
    if ensemble.len() < 2 {
        return Err(Error::Config(format!("order-statistic target needs at least 2 critics, got {}", ensemble.len())));
    }
    check_rows(batch, next)?;
    let (std, clip) = smoothing(hyper)?;
    let smoothed = smoothed_next_actions(next.actions.view(), std, clip, action_bound, rng);
    let q = ensemble.target_values(batch.next_states.view(), smoothed.view())?;
    Ok(bootstrap(batch, hyper.gamma, |i| {
        let mut row: Vec<f64> = q.iter().map(|c| c[i]).collect();
        lower_median(&mut row)
    }))
}

fn soft_target(batch: &Batch, next: &NextActions, q: &[Array1<f64>], alpha: f64, gamma: f64) -> Result<Array1<f64>> {
    let logp = next
        .log_probs
        .as_ref()
        .ok_or_else(|| Error::Contract("entropy-regularized target needs next-action log-probabilities".into()))?;
    Ok(bootstrap(batch, gamma, |i| {
        let min_q = q.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min);
        min_q - alpha * logp[i]
    }))
}

/// Soft-Q target `r + gamma * (1 - d) * (min_i Q'_i(s', a') - alpha * log pi(a'|s'))`.
pub fn sac_target(
    batch: &Batch,
    next: &NextActions,
    ensemble: &CriticEnsemble,
    alpha: f64,
    hyper: &AlgoHyper,
) -> Result<Array1<f64>> {
    check_rows(batch, next)?;
    let q = ensemble.target_values(batch.next_states.view(), next.actions.view())?;
    soft_target(batch, next, &q, alpha, hyper.gamma)
}

/// Soft-Q target over one random subset of target critics, drawn once per
/// minibatch. Returns the targets and the subset used.
pub fn redq_target<R: Rng + ?Sized>(
    batch: &Batch,
    next: &NextActions,
    ensemble: &CriticEnsemble,
    alpha: f64,
    hyper: &AlgoHyper,
    rng: &mut R,
) -> Result<(Array1<f64>, Vec<usize>)> {
    let m = hyper.ensemble_subset_size.ok_or_else(|| Error::Config("REDQ needs an ensemble subset size".into()))?;
    if m == 0 || m > ensemble.len() {
        return Err(Error::Config(format!("subset size {m} exceeds ensemble of {}", ensemble.len())));
    }
    check_rows(batch, next)?;
    let subset = index::sample(rng, ensemble.len(), m).into_vec();
    let q = ensemble.target_values_of(&subset, batch.next_states.view(), next.actions.view())?;
    Ok((soft_target(batch, next, &q, alpha, hyper.gamma)?, subset))
}
