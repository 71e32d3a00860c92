//! Reparameterized tanh-squashed Gaussian used by stochastic actors.
//!
//! For head output `[mean | log_std]` and a standard-normal draw `eps`:
//! `u = mean + exp(log_std) * eps`, `action = bound * tanh(u)`, and the
//! log-density includes the change-of-variables term for `bound * tanh`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Zip};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Clone, Debug)]
pub struct SquashedSample {
    pub action: Array2<f64>,
    pub log_prob: Array1<f64>,
    pre_tanh: Array2<f64>,
    std_eps: Array2<f64>,
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln(1 - tanh(u)^2)` without cancellation for large `|u|`.
#[inline]
fn log_sech2(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

/// Draw actions and their log-probabilities for every row of `head_out`.
pub fn squashed_sample(head_out: ArrayView2<f64>, noise: ArrayView2<f64>, bound: f64) -> SquashedSample {
    let dim = head_out.ncols() / 2;
    assert_eq!(noise.dim(), (head_out.nrows(), dim), "noise shape must be rows x action_dim");
    let mean = head_out.slice(s![.., ..dim]);
    let log_std = head_out.slice(s![.., dim..]);
    let mut pre_tanh = Array2::zeros(noise.raw_dim());
    let mut std_eps = Array2::zeros(noise.raw_dim());
    Zip::from(&mut pre_tanh)
        .and(&mut std_eps)
        .and(mean)
        .and(log_std)
        .and(noise)
        .for_each(|u, se, &m, &ls, &e| {
            *se = ls.exp() * e;
            *u = m + *se;
        });
    let action = pre_tanh.mapv(|u| bound * u.tanh());
    let ln_bound = bound.ln();
    let log_prob = Array1::from_shape_fn(head_out.nrows(), |r| {
        (0..dim)
            .map(|d| {
                let e = noise[[r, d]];
                -0.5 * e * e - log_std[[r, d]] - HALF_LN_2PI - log_sech2(pre_tanh[[r, d]]) - ln_bound
            })
            .sum()
    });
    SquashedSample { action, log_prob, pre_tanh, std_eps }
}

/// Map gradients w.r.t. `(action, log_prob)` back onto the head output
/// `[mean | log_std]`, holding the noise fixed.
pub fn squashed_backward(
    sample: &SquashedSample,
    grad_action: ArrayView2<f64>,
    grad_log_prob: ArrayView1<f64>,
    bound: f64,
) -> Array2<f64> {
    let (rows, dim) = sample.action.dim();
    let mut out = Array2::zeros((rows, 2 * dim));
    for r in 0..rows {
        let gl = grad_log_prob[r];
        for d in 0..dim {
            let t = sample.pre_tanh[[r, d]].tanh();
            let gu = grad_action[[r, d]] * bound * (1.0 - t * t) + gl * 2.0 * t;
            out[[r, d]] = gu;
            out[[r, dim + d]] = gu * sample.std_eps[[r, d]] - gl;
        }
    }
    out
}

/// Deterministic action `bound * tanh(mean)` from a single head output.
pub fn squashed_mean_action(head_out: &[f64], bound: f64) -> Vec<f64> {
    let dim = head_out.len() / 2;
    head_out[..dim].iter().map(|m| bound * m.tanh()).collect()
}
