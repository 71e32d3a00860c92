//! Multi-seed orchestration.

use std::fs;
use std::path::{Path, PathBuf};

use cic_core::algos::train_baseline;
use cic_core::cic::{cic_train, LambdaTracePoint};
use cic_core::metrics::{aggregate_runs, average_drawdown, smooth_curve, LearningCurve, RunSummary};
use cic_core::par;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{self, RunMeta};
use crate::plot::{line_chart, Series};

/// How independent seeds are scheduled. Both produce identical files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon pool when built with the `parallel` feature, sequential otherwise.
    #[default]
    Parallel,
}

#[derive(Clone, Debug)]
pub struct SeedOutcome {
    pub curve: LearningCurve,
    pub summary: RunSummary,
    /// Empty for baseline runs.
    pub lambda_trace: Vec<LambdaTracePoint>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub dir: PathBuf,
    pub runs: Vec<SeedOutcome>,
}

/// One fully seeded training run; touches no files.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let wrap = |source| HarnessError::Run { seed, source };
    let (curve, promotions, lambda_trace) = if cfg.cic {
        let out = cic_train(cfg.hyper.clone(), &cfg.cic_config, cfg.env, &cfg.run, seed, &mut ()).map_err(wrap)?;
        (out.curve, out.promotions.len(), out.lambda_trace)
    } else {
        let out = train_baseline(cfg.hyper.clone(), cfg.env, &cfg.run, seed, &mut ()).map_err(wrap)?;
        (out.curve, 0, Vec::new())
    };
    let final_score = curve.final_score().ok_or_else(|| wrap(cic_core::Error::Contract("run produced no evaluations".into())))?;
    let summary = RunSummary {
        seed,
        final_score,
        average_drawdown: average_drawdown(&curve).map_err(wrap)?,
        promotion_count: promotions,
        lambda_trace: lambda_trace.iter().map(|p| p.lambda).collect(),
    };
    Ok(SeedOutcome { curve, summary, lambda_trace })
}

/// Run every seed, then write the run directory. Nothing is written if any
/// seed fails.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let results: Vec<Result<SeedOutcome>> = match exec {
        Execution::Sequential => cfg.seeds.iter().map(|&s| run_seed(cfg, s)).collect(),
        Execution::Parallel => par::map(&cfg.seeds, |&s| run_seed(cfg, s)),
    };
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    for r in &runs {
        log::info!(
            "{} {} seed {}: final {:.2}, drawdown {:.2}, promotions {}",
            cfg.variant_name(),
            cfg.env,
            r.summary.seed,
            r.summary.final_score,
            r.summary.average_drawdown,
            r.summary.promotion_count
        );
    }
    let dir = cfg.run_dir();
    write_run_dir(&dir, cfg, &runs)?;
    Ok(ExperimentReport { dir, runs })
}

fn write_run_dir(dir: &Path, cfg: &ExperimentConfig, runs: &[SeedOutcome]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for r in runs {
        output::write_curve(&dir.join(output::curve_file(r.summary.seed)), &r.curve)?;
        if cfg.cic {
            output::write_lambda_trace(&dir.join(output::lambda_file(r.summary.seed)), &r.lambda_trace)?;
        }
    }
    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    output::write_summary(&dir.join(output::SUMMARY_FILE), &summaries)?;
    let curves: Vec<LearningCurve> = runs.iter().map(|r| r.curve.clone()).collect();
    let (mean, std) = aggregate_runs(&curves)?;
    output::write_aggregate(&dir.join(output::AGGREGATE_FILE), &mean, &std)?;
    let meta = RunMeta {
        env: cfg.env.name().into(),
        variant: cfg.variant_name(),
        total_steps: cfg.run.total_steps,
        eval_interval: cfg.run.eval_interval,
        eval_episodes: cfg.run.eval_episodes,
        seeds: cfg.seeds.clone(),
        fixed_lambda: cfg.fixed_lambda,
    };
    output::write_meta(&dir.join(output::META_FILE), &meta)?;
    let series = band_series(&meta.variant, &mean, &std, cfg.smoothing_window)?;
    let title = format!("{} on {} ({} seeds)", meta.variant, meta.env, runs.len());
    write_svg(&dir.join(output::PLOT_FILE), &line_chart(&title, "environment steps", "average return", &[series]))
}

/// Smoothed mean line with a smoothed ±std band.
pub fn band_series(label: &str, mean: &LearningCurve, std: &LearningCurve, window: usize) -> Result<Series> {
    let m = smooth_curve(mean, window)?;
    let s = smooth_curve(std, window)?;
    Ok(Series {
        label: label.into(),
        x: m.steps().iter().map(|&x| x as f64).collect(),
        y: m.scores(),
        band: Some(s.scores()),
    })
}

pub(crate) fn write_svg(path: &Path, svg: &str) -> Result<()> {
    fs::write(path, svg).map_err(|e| HarnessError::io(path, e))
}

/// Lambda settings of the sweep; `None` is the adaptive rule.
pub const SWEEP_LAMBDAS: [Option<f64>; 4] = [Some(0.0), Some(0.5), Some(1.0), None];

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub reports: Vec<ExperimentReport>,
    pub plot: PathBuf,
}

/// Run the dual-actor variant of `base` once per [`SWEEP_LAMBDAS`] entry and
/// overlay the mean curves in `<out>/sweep-<algo>-<env>.svg`.
pub fn sweep(base: &ExperimentConfig, exec: Execution) -> Result<SweepReport> {
    let mut reports = Vec::new();
    let mut series = Vec::new();
    for lambda in SWEEP_LAMBDAS {
        let mut cfg = base.clone();
        cfg.cic = true;
        cfg.fixed_lambda = lambda;
        cfg.cic_config.fixed_lambda = lambda;
        cfg.cic_config.validate()?;
        let report = run_experiment(&cfg, exec)?;
        let curves: Vec<LearningCurve> = report.runs.iter().map(|r| r.curve.clone()).collect();
        let (mean, std) = aggregate_runs(&curves)?;
        let label = lambda.map_or_else(|| "adaptive".to_string(), |l| format!("lambda = {l}"));
        series.push(band_series(&label, &mean, &std, cfg.smoothing_window)?);
        reports.push(report);
    }
    fs::create_dir_all(&base.out_root).map_err(|e| HarnessError::io(&base.out_root, e))?;
    let plot = base.out_root.join(format!("sweep-{}-{}.svg", base.algo, base.env));
    let title = format!("fixed vs adaptive lambda, {}-cic on {}", base.algo, base.env);
    write_svg(&plot, &line_chart(&title, "environment steps", "average return", &series))?;
    Ok(SweepReport { reports, plot })
}
