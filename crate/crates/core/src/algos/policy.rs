use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::envs::{Controller, EnvSpec};
use crate::error::Result;
use crate::numkit::{squashed_mean_action, squashed_sample, Activation, Mlp, MlpSpec, OutputHead, SquashedSample};

/// How actions are chosen while collecting data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exploration {
    /// The deterministic or mean action.
    Greedy,
    /// Greedy action plus `N(0, std^2)` noise, then clipped.
    Gaussian(f64),
    /// A draw from the stochastic policy.
    Sample,
}

/// An actor network together with its action box.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    pub net: Mlp,
    pub action_bound: f64,
}

impl Policy {
    /// `bound * tanh` deterministic actor.
    pub fn deterministic<R: Rng + ?Sized>(env: &EnvSpec, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let spec = MlpSpec::new(
            layer_sizes(env.state_dim, hidden, env.action_dim),
            Activation::Relu,
            OutputHead::TanhScaled { action_bound: env.action_bound },
        )?;
        Ok(Self { net: Mlp::new(spec, rng), action_bound: env.action_bound })
    }

    /// Tanh-squashed Gaussian actor.
    pub fn gaussian<R: Rng + ?Sized>(env: &EnvSpec, hidden: &[usize], log_std_clip: (f64, f64), rng: &mut R) -> Result<Self> {
        let spec = MlpSpec::new(
            layer_sizes(env.state_dim, hidden, env.action_dim),
            Activation::Relu,
            OutputHead::Gaussian { log_std_min: log_std_clip.0, log_std_max: log_std_clip.1 },
        )?;
        Ok(Self { net: Mlp::new(spec, rng), action_bound: env.action_bound })
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self.net.spec.output_head, OutputHead::Gaussian { .. })
    }

    pub fn action_dim(&self) -> usize {
        *self.net.spec.layer_sizes.last().unwrap()
    }

    pub fn mean_action(&self, state: &[f64]) -> Result<Vec<f64>> {
        let out = self.net.forward(state)?;
        Ok(if self.is_stochastic() { squashed_mean_action(&out, self.action_bound) } else { out })
    }

    pub fn mean_actions(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        let out = self.net.forward_batch(states)?;
        if !self.is_stochastic() {
            return Ok(out);
        }
        let dim = self.action_dim();
        Ok(Array2::from_shape_fn((out.nrows(), dim), |(r, d)| self.action_bound * out[[r, d]].tanh()))
    }

    /// Reparameterized samples with externally supplied standard-normal noise.
    pub fn sample_with_noise(&self, states: ArrayView2<f64>, noise: ArrayView2<f64>) -> Result<SquashedSample> {
        debug_assert!(self.is_stochastic());
        let out = self.net.forward_batch(states)?;
        Ok(squashed_sample(out.view(), noise, self.action_bound))
    }

    pub fn sample_actions<R: Rng + ?Sized>(&self, states: ArrayView2<f64>, rng: &mut R) -> Result<(Array2<f64>, Array1<f64>)> {
        let noise = standard_normal((states.nrows(), self.action_dim()), rng);
        let s = self.sample_with_noise(states, noise.view())?;
        Ok((s.action, s.log_prob))
    }

    /// Action for data collection.
    pub fn explore<R: Rng + ?Sized>(&self, state: &[f64], mode: Exploration, rng: &mut R) -> Result<Vec<f64>> {
        match mode {
            Exploration::Greedy => self.mean_action(state),
            Exploration::Gaussian(std) => {
                let mut a = self.mean_action(state)?;
                for v in &mut a {
                    let eps: f64 = rng.sample(StandardNormal);
                    *v = (*v + std * eps).clamp(-self.action_bound, self.action_bound);
                }
                Ok(a)
            }
            Exploration::Sample => {
                let x = ArrayView2::from_shape((1, state.len()), state).expect("row view");
                let (a, _) = self.sample_actions(x, rng)?;
                Ok(a.into_raw_vec_and_offset().0)
            }
        }
    }
}

impl Controller for Policy {
    fn act(&self, state: &[f64]) -> Vec<f64> {
        self.mean_action(state).expect("state dimension matches the policy")
    }
}

pub(crate) fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    std::iter::once(input).chain(hidden.iter().copied()).chain(std::iter::once(output)).collect()
}

/// Row-major matrix of standard-normal draws.
pub(crate) fn standard_normal<R: Rng + ?Sized>(shape: (usize, usize), rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn(shape, || rng.sample(StandardNormal))
}
