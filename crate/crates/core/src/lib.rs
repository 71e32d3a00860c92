//! Actor-critic reinforcement learning with a dual-actor critic-target scheme.
//!
//! The crate is self-contained: small dense networks with hand-written
//! backpropagation and Adam ([`numkit`]), three continuous-control tasks
//! ([`envs`]), a FIFO replay buffer, the TD3/QMD3/SAC/REDQ update rules
//! ([`algos`]) and the dual-actor trainer ([`cic`]).
//!
//! Every run is a pure function of its configuration and seed. Critic
//! ensembles are updated in parallel when the `parallel` feature is on; the
//! results are bit-identical either way.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algos;
pub mod cic;
pub mod envs;
pub mod error;
pub mod metrics;
pub mod numkit;
pub mod par;
pub mod replay;
pub mod run;

pub use error::{Error, Result};
