use super::collect::{collect_random, evaluate_and_collect};
use super::dual::{maybe_promote, mixed_next_actions, DualActor, ScoreHistory};
use super::lambda::LambdaState;
use super::CicConfig;
use crate::algos::{ActorCritic, AlgoHyper, Exploration, Policy};
use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::metrics::{eval_policy, LearningCurve};
use crate::replay::ReplayBuffer;
use crate::run::{RunConfig, RunRngs};

/// One evaluate/promote/adapt/train cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Environment steps once this round's episodes were played.
    pub env_steps: u64,
    /// Lambda in force while actor2 played; paired with `score2`.
    pub lambda: f64,
    /// Lambda used for this round's gradient iterations.
    pub next_lambda: f64,
    pub score1: Option<f64>,
    pub score2: f64,
    pub actor1_mean_before: Option<f64>,
    pub actor2_mean: f64,
    pub promoted: bool,
    pub gradient_steps: u64,
    /// Fingerprint of actor1 after the promotion test.
    pub actor1_fingerprint: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PromotionEvent {
    pub round: usize,
    pub env_steps: u64,
    pub actor1_mean: f64,
    pub actor2_mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaTracePoint {
    pub round: usize,
    pub lambda: f64,
    pub score2: f64,
}

pub trait CicObserver {
    fn on_round(&mut self, _record: &RoundRecord, _dual: &DualActor) {}
    /// After gradient iteration `iteration` (1-based, over the whole run).
    fn on_gradient_step(&mut self, _iteration: u64, _dual: &DualActor, _lambda: f64, _actor1_rows: usize) {}
}

impl CicObserver for () {}

#[derive(Clone, Debug)]
pub struct CicOutcome {
    pub actor1: Policy,
    pub actor2: Policy,
    pub curve: LearningCurve,
    pub rounds: Vec<RoundRecord>,
    pub promotions: Vec<PromotionEvent>,
    pub lambda_trace: Vec<LambdaTracePoint>,
    pub gradient_steps: u64,
    pub env_steps: u64,
    pub initial_actor1_fingerprint: u64,
}

/// Train with the dual-actor scheme for `run.total_steps` environment steps.
///
/// The curve evaluates actor1, which is also the returned policy. Rounds
/// always finish their episodes, so the last one may overshoot the budget.
pub fn cic_train(
    hyper: AlgoHyper,
    cfg: &CicConfig,
    env_kind: EnvKind,
    run: &RunConfig,
    seed: u64,
    observer: &mut dyn CicObserver,
) -> Result<CicOutcome> {
    run.validate()?;
    cfg.validate()?;
    let mut rngs = RunRngs::new(seed);
    let spec = env_kind.spec();
    let learner = ActorCritic::new(hyper, spec, &mut rngs.init)?;
    let hyper = learner.hyper.clone();
    let exploration = learner.exploration();
    let mut dual = DualActor::new(learner);
    let initial_actor1_fingerprint = dual.actor1.net.params.fingerprint();

    let mut buffer = ReplayBuffer::new(hyper.replay_capacity, spec.state_dim, spec.action_dim)?;
    let mut env = env_kind.make();
    let mut lambda = LambdaState::new(cfg.lambda_buffer_size, cfg.sigma);
    if let Some(l) = cfg.fixed_lambda {
        lambda.set_lambda(l);
    }
    let mut history = ScoreHistory::default();
    let mut curve = LearningCurve::new(run.eval_interval, run.eval_episodes);
    let grid = run.eval_steps();
    let mut next_eval = 0;
    let eval_seeds = rngs.clone();
    let mut flush = |t: u64, actor1: &Policy, curve: &mut LearningCurve| -> Result<()> {
        while next_eval < grid.len() && grid[next_eval] <= t {
            let step = grid[next_eval];
            let score = eval_policy(actor1, || env_kind.make(), run.eval_episodes, eval_seeds.eval_seed(step / run.eval_interval))?;
            curve.push(step, score);
            next_eval += 1;
        }
        Ok(())
    };

    let mut t = collect_random(env.as_mut(), hyper.warmup_steps.min(run.total_steps), &mut buffer, &mut rngs.collect)?;
    flush(t, &dual.actor1, &mut curve)?;

    let mut rounds = Vec::new();
    let mut promotions = Vec::new();
    let mut lambda_trace = Vec::new();
    let mut gradient_steps = 0u64;
    while t < run.total_steps {
        let round = rounds.len() + 1;
        let mut delta = 0;
        let mut score1 = None;
        if cfg.evaluate_actor1 && history.actor1_episodes_played < cfg.actor1_episode_cap {
            let e1 = evaluate_and_collect(&dual.actor1, env.as_mut(), 1, Exploration::Greedy, &mut buffer, &mut rngs.collect)?;
            history.actor1_scores.push(e1.mean_score);
            history.actor1_episodes_played += 1;
            delta += e1.steps;
            score1 = Some(e1.mean_score);
        }
        let e2 = evaluate_and_collect(dual.actor2(), env.as_mut(), cfg.kappa, exploration, &mut buffer, &mut rngs.collect)?;
        delta += e2.steps;
        history.actor2_scores = e2.returns;

        let used_lambda = lambda.lambda();
        lambda.record(e2.mean_score);
        lambda_trace.push(LambdaTracePoint { round, lambda: used_lambda, score2: e2.mean_score });

        let actor1_mean_before = history.actor1_mean();
        let promoted = cfg.promotion && maybe_promote(&mut dual, &mut history);
        if promoted {
            promotions.push(PromotionEvent {
                round,
                env_steps: t + delta,
                actor1_mean: actor1_mean_before.expect("promotion needs an actor1 score"),
                actor2_mean: e2.mean_score,
            });
        }
        if cfg.fixed_lambda.is_none() {
            lambda.adapt(&mut rngs.lambda);
        }
        let lam = lambda.lambda();

        for _ in 0..delta * hyper.utd_ratio as u64 {
            let step = (|| -> Result<usize> {
                let batch = buffer.sample_batch(hyper.batch_size, &mut rngs.train)?;
                let (next, k) = mixed_next_actions(batch.next_states.view(), lam, &dual.actor1, dual.actor2(), &mut rngs.train)?;
                dual.learner.update(&batch, &next, &mut rngs.train)?;
                Ok(k)
            })();
            let k = step.map_err(|e| Error::Numeric {
                step: gradient_steps + 1,
                detail: format!("round {round} at env step {t} (lambda {lam}): {e}"),
            })?;
            gradient_steps += 1;
            observer.on_gradient_step(gradient_steps, &dual, lam, k);
        }
        t += delta;

        let record = RoundRecord {
            round,
            env_steps: t,
            lambda: used_lambda,
            next_lambda: lam,
            score1,
            score2: e2.mean_score,
            actor1_mean_before,
            actor2_mean: e2.mean_score,
            promoted,
            gradient_steps,
            actor1_fingerprint: dual.actor1.net.params.fingerprint(),
        };
        observer.on_round(&record, &dual);
        rounds.push(record);
        flush(t, &dual.actor1, &mut curve)?;
    }

    Ok(CicOutcome {
        actor2: dual.learner.actor,
        actor1: dual.actor1,
        curve,
        rounds,
        promotions,
        lambda_trace,
        gradient_steps,
        env_steps: t,
        initial_actor1_fingerprint,
    })
}
