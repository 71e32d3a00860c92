use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

/// How the final affine layer is turned into the network output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutputHead {
    Linear,
    /// `action_bound * tanh(z)`, bounded componentwise.
    TanhScaled { action_bound: f64 },
    /// Final layer is twice as wide: `[mean | clamp(log_std)]`.
    Gaussian { log_std_min: f64, log_std_max: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_head: OutputHead,
}

impl MlpSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        hidden_activation: Activation,
        output_head: OutputHead,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "an MLP needs at least input and output sizes, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!("zero-width layer in {layer_sizes:?}")));
        }
        match output_head {
            OutputHead::TanhScaled { action_bound } if !(action_bound > 0.0) => {
                return Err(Error::Config(format!("action bound must be positive, got {action_bound}")));
            }
            OutputHead::Gaussian { log_std_min, log_std_max } if !(log_std_min < log_std_max) => {
                return Err(Error::Config(format!(
                    "log-std clip must satisfy lower < upper, got [{log_std_min}, {log_std_max}]"
                )));
            }
            _ => {}
        }
        Ok(Self { layer_sizes, hidden_activation, output_head })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Width of the network output (doubled for the Gaussian head).
    pub fn output_dim(&self) -> usize {
        let last = *self.layer_sizes.last().unwrap();
        match self.output_head {
            OutputHead::Gaussian { .. } => 2 * last,
            _ => last,
        }
    }

    /// `(fan_out, fan_in)` of every affine layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let n = self.layer_sizes.len();
        (1..n)
            .map(|i| {
                let out = if i == n - 1 { self.output_dim() } else { self.layer_sizes[i] };
                (out, self.layer_sizes[i - 1])
            })
            .collect()
    }
}

/// One affine layer; `weight` is `fan_out x fan_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Weights and biases of every layer. Also used for gradients and Adam moments.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    pub fn zeros(spec: &MlpSpec) -> Self {
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(out, inp)| Layer { weight: Array2::zeros((out, inp)), bias: Array1::zeros(out) })
            .collect();
        Self { layers }
    }

    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and biases.
    pub fn init_uniform<R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> Self {
        let mut params = Self::zeros(spec);
        for layer in &mut params.layers {
            let bound = 1.0 / (layer.weight.ncols() as f64).sqrt();
            layer.weight.mapv_inplace(|_| rng.random_range(-bound..bound));
            layer.bias.mapv_inplace(|_| rng.random_range(-bound..bound));
        }
        params
    }

    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer { weight: Array2::zeros(l.weight.raw_dim()), bias: Array1::zeros(l.bias.len()) })
            .collect();
        Self { layers }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weight.dim() == b.weight.dim() && a.bias.len() == b.bias.len())
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// All entries, layer by layer, weights (row-major) before biases.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weight.iter().chain(l.bias.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weight.iter_mut().chain(l.bias.iter_mut()))
    }

    /// First non-finite entry as `(layer, index within layer)`.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.layers.iter().enumerate().find_map(|(li, l)| {
            l.weight.iter().chain(l.bias.iter()).position(|v| !v.is_finite()).map(|i| (li, i))
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// FNV-1a over the bit patterns of every entry.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.iter() {
            for byte in v.to_bits().to_le_bytes() {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        hash
    }

    fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight.scaled_add(scale, &b.weight);
            a.bias.scaled_add(scale, &b.bias);
        }
    }

    /// `self += other`, shapes assumed equal.
    pub fn accumulate(&mut self, other: &Self) {
        self.add_scaled(other, 1.0);
    }
}

/// Polyak update `target <- tau * online + (1 - tau) * target`.
pub fn soft_update(target: &mut MlpParams, online: &MlpParams, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Contract(format!("soft-update ratio must lie in [0, 1], got {tau}")));
    }
    if !target.same_shape(online) {
        return Err(Error::Contract("soft update between differently shaped networks".into()));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        Zip::from(&mut t.weight).and(&o.weight).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        Zip::from(&mut t.bias).and(&o.bias).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
    }
    Ok(())
}

/// Intermediate values of a batched forward pass, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// Input of every layer; `layer_inputs[0]` is the network input.
    layer_inputs: Vec<Array2<f64>>,
    /// Pre-activation of every layer.
    pre: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

/// Network = architecture + parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Self {
        let params = MlpParams::init_uniform(&spec, rng);
        Self { spec, params }
    }

    pub fn zeros(spec: MlpSpec) -> Self {
        let params = MlpParams::zeros(&spec);
        Self { spec, params }
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.spec.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp input",
                expected: self.spec.input_dim(),
                got: cols,
            });
        }
        Ok(())
    }

    /// Forward pass on a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row view");
        Ok(self.forward_batch(x)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass on a batch (one row per sample).
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(input.ncols())?;
        let n = self.params.layers.len();
        let mut h = input.to_owned();
        for (i, layer) in self.params.layers.iter().enumerate() {
            let mut z = h.dot(&layer.weight.t());
            z += &layer.bias;
            if i + 1 < n {
                self.activate(&mut z);
                h = z;
            } else {
                return Ok(self.head(&z));
            }
        }
        unreachable!("spec guarantees at least one layer")
    }

    /// Forward pass recording what the backward pass needs.
    pub fn forward_traced(&self, input: ArrayView2<f64>) -> Result<ForwardTrace> {
        self.check_input(input.ncols())?;
        let n = self.params.layers.len();
        let mut layer_inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        layer_inputs.push(input.to_owned());
        for (i, layer) in self.params.layers.iter().enumerate() {
            let mut z = layer_inputs[i].dot(&layer.weight.t());
            z += &layer.bias;
            if i + 1 < n {
                let mut a = z.clone();
                self.activate(&mut a);
                layer_inputs.push(a);
            }
            pre.push(z);
        }
        let output = self.head(pre.last().unwrap());
        Ok(ForwardTrace { layer_inputs, pre, output })
    }

    /// Reverse pass for the scalar `sum_rows(upstream . output)`.
    ///
    /// Returns parameter gradients summed over the batch (when requested) and
    /// the per-row input gradient.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        upstream: ArrayView2<f64>,
        want_param_grads: bool,
    ) -> Result<(Option<MlpParams>, Array2<f64>)> {
        if upstream.dim() != trace.output.dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp upstream gradient",
                expected: trace.output.ncols(),
                got: upstream.ncols(),
            });
        }
        let n = self.params.layers.len();
        let mut delta = self.head_backward(trace.pre.last().unwrap(), &trace.output, upstream);
        let mut grads = want_param_grads.then(|| self.params.zeros_like());
        for i in (0..n).rev() {
            let layer = &self.params.layers[i];
            if let Some(g) = grads.as_mut() {
                g.layers[i].weight = delta.t().dot(&trace.layer_inputs[i]);
                g.layers[i].bias = delta.sum_axis(Axis(0));
            }
            let mut dx = delta.dot(&layer.weight);
            if i == 0 {
                return Ok((grads, dx));
            }
            let z = &trace.pre[i - 1];
            match self.spec.hidden_activation {
                Activation::Relu => Zip::from(&mut dx).and(z).for_each(|d, &z| {
                    if z <= 0.0 {
                        *d = 0.0
                    }
                }),
                Activation::Tanh => Zip::from(&mut dx)
                    .and(&trace.layer_inputs[i])
                    .for_each(|d, &a| *d *= 1.0 - a * a),
            }
            delta = dx;
        }
        unreachable!("spec guarantees at least one layer")
    }

    /// Gradients of `upstream . output` for a single input.
    pub fn gradient(&self, input: &[f64], upstream: &[f64]) -> Result<(MlpParams, Vec<f64>)> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row view");
        let trace = self.forward_traced(x)?;
        if upstream.len() != self.spec.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp upstream gradient",
                expected: self.spec.output_dim(),
                got: upstream.len(),
            });
        }
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row view");
        let (grads, dx) = self.backward(&trace, up, true)?;
        Ok((grads.expect("requested"), dx.into_raw_vec_and_offset().0))
    }

    fn activate(&self, z: &mut Array2<f64>) {
        match self.spec.hidden_activation {
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
        }
    }

    fn head(&self, z: &Array2<f64>) -> Array2<f64> {
        match self.spec.output_head {
            OutputHead::Linear => z.clone(),
            OutputHead::TanhScaled { action_bound } => z.mapv(|v| action_bound * v.tanh()),
            OutputHead::Gaussian { log_std_min, log_std_max } => {
                let half = z.ncols() / 2;
                let mut out = z.clone();
                out.slice_mut(s![.., half..]).mapv_inplace(|v| v.clamp(log_std_min, log_std_max));
                out
            }
        }
    }

    fn head_backward(&self, z: &Array2<f64>, out: &Array2<f64>, up: ArrayView2<f64>) -> Array2<f64> {
        match self.spec.output_head {
            OutputHead::Linear => up.to_owned(),
            OutputHead::TanhScaled { action_bound } => {
                let mut d = up.to_owned();
                Zip::from(&mut d).and(out).for_each(|d, &o| {
                    let t = o / action_bound;
                    *d *= action_bound * (1.0 - t * t);
                });
                d
            }
            OutputHead::Gaussian { log_std_min, log_std_max } => {
                let half = z.ncols() / 2;
                let mut d = up.to_owned();
                Zip::from(d.slice_mut(s![.., half..]))
                    .and(z.slice(s![.., half..]))
                    .for_each(|d, &z| {
                        if !(z > log_std_min && z < log_std_max) {
                            *d = 0.0;
                        }
                    });
                d
            }
        }
    }
}
