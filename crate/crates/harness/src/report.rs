//! Reading run directories back: comparison tables and plots.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use cic_core::metrics::{aggregate_runs, average_drawdown, LearningCurve};

use crate::error::{HarnessError, Result};
use crate::output::{self, RunMeta};
use crate::plot::{line_chart, Series};
use crate::runner::{band_series, write_svg};

/// A run directory loaded from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub meta: RunMeta,
    pub curves: Vec<(u64, LearningCurve)>,
}

impl LoadedRun {
    pub fn label(&self) -> String {
        format!("{}/{}", self.meta.variant, self.meta.env)
    }
}

/// Load `meta.toml` and the curve of every seed it lists.
pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let meta = output::read_meta(&dir.join(output::META_FILE))?;
    let curves = meta
        .seeds
        .iter()
        .map(|&s| Ok((s, output::read_curve(&dir.join(output::curve_file(s)), meta.eval_interval, meta.eval_episodes)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedRun { dir: dir.to_path_buf(), meta, curves })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub seeds: usize,
    pub final_mean: f64,
    pub final_std: f64,
    pub drawdown_mean: f64,
    pub drawdown_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

/// Final score and average drawdown per run set, recomputed from the seed CSVs.
pub fn comparison_row(run: &LoadedRun) -> Result<ComparisonRow> {
    let finals: Vec<f64> = run.curves.iter().map(|(_, c)| c.final_score().expect("non-empty curve")).collect();
    let drawdowns = run.curves.iter().map(|(_, c)| average_drawdown(c)).collect::<Result<Vec<_>, _>>()?;
    let (final_mean, final_std) = mean_std(&finals);
    let (drawdown_mean, drawdown_std) = mean_std(&drawdowns);
    Ok(ComparisonRow { label: run.label(), seeds: finals.len(), final_mean, final_std, drawdown_mean, drawdown_std })
}

/// Compare run directories; also writes an overlay of their mean curves to `svg_out`.
pub fn compare(dirs: &[PathBuf], svg_out: &Path, window: usize) -> Result<Vec<ComparisonRow>> {
    if dirs.is_empty() {
        return Err(HarnessError::Config("compare needs at least one directory".into()));
    }
    let runs = dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    let rows = runs.iter().map(comparison_row).collect::<Result<Vec<_>>>()?;
    let mut series = Vec::new();
    for run in &runs {
        let curves: Vec<LearningCurve> = run.curves.iter().map(|(_, c)| c.clone()).collect();
        let (mean, std) = aggregate_runs(&curves).map_err(|e| HarnessError::schema(&run.dir, e.to_string()))?;
        series.push(band_series(&run.label(), &mean, &std, window)?);
    }
    write_svg(svg_out, &line_chart("comparison", "environment steps", "average return", &series))?;
    Ok(rows)
}

pub fn format_table(rows: &[ComparisonRow]) -> String {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(3);
    let mut out = format!("{:<width$}  {:>5}  {:>22}  {:>22}\n", "run", "seeds", "final score", "average drawdown");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>22}  {:>22}",
            r.label,
            r.seeds,
            format!("{:.2} ± {:.2}", r.final_mean, r.final_std),
            format!("{:.2} ± {:.2}", r.drawdown_mean, r.drawdown_std)
        );
    }
    out
}

/// Redraw `curve.svg` (and `lambda.svg` for dual-actor runs) from the CSVs in `dir`.
pub fn plot_dir(dir: &Path, window: usize) -> Result<Vec<PathBuf>> {
    let run = load_run(dir)?;
    let curves: Vec<LearningCurve> = run.curves.iter().map(|(_, c)| c.clone()).collect();
    let (mean, std) = aggregate_runs(&curves).map_err(|e| HarnessError::schema(dir, e.to_string()))?;
    let curve_svg = dir.join(output::PLOT_FILE);
    let title = format!("{} on {} ({} seeds)", run.meta.variant, run.meta.env, curves.len());
    write_svg(&curve_svg, &line_chart(&title, "environment steps", "average return", &[band_series(&run.label(), &mean, &std, window)?]))?;
    let mut written = vec![curve_svg];

    let mut traces = Vec::new();
    for &seed in &run.meta.seeds {
        let path = dir.join(output::lambda_file(seed));
        if path.is_file() {
            let t = output::read_lambda_trace(&path)?;
            traces.push(Series {
                label: format!("seed {seed}"),
                x: t.iter().map(|p| p.round as f64).collect(),
                y: t.iter().map(|p| p.lambda).collect(),
                band: None,
            });
        }
    }
    if !traces.is_empty() {
        let path = dir.join("lambda.svg");
        write_svg(&path, &line_chart(&format!("lambda per round, {}", run.label()), "round", "lambda", &traces))?;
        written.push(path);
    }
    Ok(written)
}
