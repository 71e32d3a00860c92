//! Evaluation protocol, curve smoothing, average drawdown and multi-seed
//! aggregation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::{Controller, Env};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub step: u64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    pub eval_episodes: usize,
    pub eval_interval: u64,
}

impl LearningCurve {
    pub fn new(eval_interval: u64, eval_episodes: usize) -> Self {
        Self { points: Vec::new(), eval_episodes, eval_interval }
    }

    pub fn from_points(points: Vec<CurvePoint>, eval_interval: u64, eval_episodes: usize) -> Self {
        Self { points, eval_episodes, eval_interval }
    }

    pub fn push(&mut self, step: u64, score: f64) {
        debug_assert!(self.points.last().is_none_or(|p| p.step < step), "steps must increase");
        self.points.push(CurvePoint { step, score });
    }

    pub fn scores(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.score).collect()
    }

    pub fn steps(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.step).collect()
    }

    pub fn final_score(&self) -> Option<f64> {
        self.points.last().map(|p| p.score)
    }

    fn with_scores(&self, scores: impl IntoIterator<Item = f64>) -> Self {
        let points = self.points.iter().zip(scores).map(|(p, score)| CurvePoint { step: p.step, score }).collect();
        Self { points, ..*self }
    }
}

/// Per-seed outcome of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub final_score: f64,
    pub average_drawdown: f64,
    pub promotion_count: usize,
    pub lambda_trace: Vec<f64>,
}

/// Mean undiscounted return of `episodes` greedy episodes, each on a fresh
/// environment instance. Touches nothing but its own environments.
pub fn eval_policy<C, E, F>(actor: &C, make_env: F, episodes: usize, seed: u64) -> Result<f64>
where
    C: Controller + ?Sized,
    E: Env,
    F: Fn() -> E,
{
    if episodes == 0 {
        return Err(Error::Config("evaluation needs at least one episode".into()));
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut e = make_env();
        let mut state = e.reset(seeds.random());
        loop {
            let r = e.step(&actor.act(&state))?;
            total += r.reward;
            if r.done() {
                break;
            }
            state = r.next_state;
        }
    }
    Ok(total / episodes as f64)
}

/// Centered moving average; the window is truncated at the ends.
pub fn smooth_curve(curve: &LearningCurve, window: usize) -> Result<LearningCurve> {
    if window == 0 {
        return Err(Error::Config("smoothing window must be at least 1".into()));
    }
    let s = curve.scores();
    let back = (window - 1) / 2;
    let ahead = window / 2;
    let smoothed = (0..s.len()).map(|i| {
        let lo = i.saturating_sub(back);
        let hi = (i + ahead).min(s.len() - 1);
        s[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
    });
    Ok(curve.with_scores(smoothed.collect::<Vec<_>>()))
}

/// Per-point gap to the running maximum.
pub fn drawdowns(scores: &[f64]) -> Vec<f64> {
    let mut peak = f64::NEG_INFINITY;
    scores
        .iter()
        .map(|&s| {
            peak = peak.max(s);
            (peak - s).max(0.0)
        })
        .collect()
}

/// Mean drawdown against the running maximum of the raw curve.
pub fn average_drawdown(curve: &LearningCurve) -> Result<f64> {
    if curve.points.is_empty() {
        return Err(Error::Contract("average drawdown of an empty curve".into()));
    }
    let d = drawdowns(&curve.scores());
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Pointwise mean and population standard deviation across runs.
pub fn aggregate_runs(curves: &[LearningCurve]) -> Result<(LearningCurve, LearningCurve)> {
    let first = curves.first().ok_or_else(|| Error::Contract("no curves to aggregate".into()))?;
    let grid = first.steps();
    if let Some(bad) = curves.iter().position(|c| c.steps() != grid) {
        return Err(Error::Contract(format!("curve {bad} does not share the step grid of curve 0")));
    }
    let n = curves.len() as f64;
    let mut mean = Vec::with_capacity(grid.len());
    let mut std = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let m = curves.iter().map(|c| c.points[k].score).sum::<f64>() / n;
        let var = curves.iter().map(|c| (c.points[k].score - m).powi(2)).sum::<f64>() / n;
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok((first.with_scores(mean), first.with_scores(std)))
}
