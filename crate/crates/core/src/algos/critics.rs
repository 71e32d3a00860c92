use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use super::policy::layer_sizes;
use crate::error::{Error, Result};
use crate::numkit::{soft_update, Activation, AdamConfig, AdamState, Mlp, MlpSpec, OutputHead};
use crate::par;
use crate::replay::Batch;

/// One Q-network with its target copy and optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticMember {
    pub online: Mlp,
    pub target: Mlp,
    pub optim: AdamState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticEnsemble {
    pub members: Vec<CriticMember>,
}

/// `[state | action]` rows.
pub fn critic_input(states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Array2<f64> {
    concatenate(Axis(1), &[states, actions]).expect("row counts agree")
}

impl CriticEnsemble {
    /// `count` critics, each with its target initialized as an exact copy.
    pub fn new<R: Rng + ?Sized>(
        count: usize,
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let spec = MlpSpec::new(layer_sizes(state_dim + action_dim, hidden, 1), Activation::Relu, OutputHead::Linear)?;
        let members = (0..count)
            .map(|_| {
                let online = Mlp::new(spec.clone(), rng);
                let optim = AdamState::new(&online.params, AdamConfig::with_lr(learning_rate));
                CriticMember { target: online.clone(), online, optim }
            })
            .collect();
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Target-network values, one vector per critic.
    pub fn target_values(&self, states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Vec<Array1<f64>>> {
        let x = critic_input(states, actions);
        par::map(&self.members, |m| m.target.forward_batch(x.view()).map(|q| q.column(0).to_owned()))
            .into_iter()
            .collect()
    }

    /// Target-network values of the critics at `indices`, in that order.
    pub fn target_values_of(
        &self,
        indices: &[usize],
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> Result<Vec<Array1<f64>>> {
        let x = critic_input(states, actions);
        par::map(indices, |&i| self.members[i].target.forward_batch(x.view()).map(|q| q.column(0).to_owned()))
            .into_iter()
            .collect()
    }

    /// Online-network values, one vector per critic.
    pub fn online_values(&self, states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Vec<Array1<f64>>> {
        let x = critic_input(states, actions);
        par::map(&self.members, |m| m.online.forward_batch(x.view()).map(|q| q.column(0).to_owned()))
            .into_iter()
            .collect()
    }

    pub fn soft_update_targets(&mut self, tau: f64) -> Result<()> {
        for m in &mut self.members {
            soft_update(&mut m.target.params, &m.online.params, tau)?;
        }
        Ok(())
    }
}

/// One Adam step per online critic on `mean((Q(s, a) - y)^2)`, with `y` held
/// constant. Returns the loss averaged over critics (measured before the step).
pub fn critic_update(ensemble: &mut CriticEnsemble, batch: &Batch, targets: ArrayView1<f64>) -> Result<f64> {
    if targets.len() != batch.len() {
        return Err(Error::DimensionMismatch { context: "critic targets", expected: batch.len(), got: targets.len() });
    }
    let x = critic_input(batch.states.view(), batch.actions.view());
    let n = batch.len() as f64;
    let losses = par::map_mut(&mut ensemble.members, |m| -> Result<f64> {
        let trace = m.online.forward_traced(x.view())?;
        let q = trace.output.column(0);
        let residual = &q - &targets;
        let loss = residual.dot(&residual) / n;
        if !loss.is_finite() {
            return Err(Error::Numeric { step: m.optim.step, detail: format!("critic loss is {loss}") });
        }
        let upstream = residual.mapv(|r| 2.0 * r / n).insert_axis(Axis(1));
        let (grads, _) = m.online.backward(&trace, upstream.view(), true)?;
        m.optim.apply(&mut m.online.params, &grads.expect("requested"))?;
        Ok(loss)
    });
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / ensemble.len() as f64)
}
