//! Dual-actor training with adaptive next-action mixing.
//!
//! `actor1` is a frozen representative policy that only changes when the
//! trained `actor2` outscores it. Critic targets take their next actions from
//! `actor1` for the first `floor(N * lambda)` rows of every minibatch and from
//! `actor2` for the rest; `lambda` adapts from a short history of
//! `(lambda, actor2 score)` pairs. There is no actor target.

mod collect;
mod dual;
mod lambda;
mod train;

use crate::algos::AlgoKind;
use crate::error::{Error, Result};

pub use collect::{collect_random, evaluate_and_collect, Evaluation};
pub use dual::{actor1_rows, maybe_promote, mixed_next_actions, DualActor, ScoreHistory};
pub use lambda::{LambdaEntry, LambdaState};
pub use train::{cic_train, CicObserver, CicOutcome, LambdaTracePoint, PromotionEvent, RoundRecord};

#[derive(Clone, Debug, PartialEq)]
pub struct CicConfig {
    /// Episodes actor2 plays per round.
    pub kappa: usize,
    pub lambda_buffer_size: usize,
    /// Standard deviation of the lambda perturbation.
    pub sigma: f64,
    /// Episodes after which actor1 stops being evaluated.
    pub actor1_episode_cap: usize,
    /// Hold lambda constant instead of adapting it.
    pub fixed_lambda: Option<f64>,
    pub promotion: bool,
    pub evaluate_actor1: bool,
}

impl CicConfig {
    pub fn defaults(algo: AlgoKind) -> Self {
        Self {
            kappa: match algo {
                AlgoKind::Td3 | AlgoKind::Sac => 1,
                AlgoKind::Qmd3 | AlgoKind::Redq => 2,
            },
            lambda_buffer_size: if algo == AlgoKind::Redq { 6 } else { 10 },
            sigma: 0.1,
            actor1_episode_cap: 10,
            fixed_lambda: None,
            promotion: true,
            evaluate_actor1: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 || self.lambda_buffer_size == 0 || self.actor1_episode_cap == 0 {
            return Err(Error::Config("kappa, lambda buffer size and actor1 episode cap must be positive".into()));
        }
        if self.kappa > self.actor1_episode_cap {
            return Err(Error::Config(format!(
                "kappa {} exceeds the actor1 episode cap {}",
                self.kappa, self.actor1_episode_cap
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("lambda std {} must be finite and non-negative", self.sigma)));
        }
        if let Some(l) = self.fixed_lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Config(format!("fixed lambda {l} outside [0, 1]")));
            }
        }
        Ok(())
    }
}
