//! Dense feed-forward networks with exact reverse-mode gradients, Adam and
//! Polyak target updates. Everything is double precision.

mod adam;
mod mlp;
mod squash;

pub use adam::{adam_scalar_step, AdamConfig, AdamState, ScalarAdam};
pub use mlp::{soft_update, Activation, ForwardTrace, Layer, Mlp, MlpParams, MlpSpec, OutputHead};
pub use squash::{squashed_backward, squashed_mean_action, squashed_sample, SquashedSample};
