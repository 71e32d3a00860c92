//! CSV files of a run directory.
//!
//! - `seed<k>.csv`: `step,score`
//! - `lambda_seed<k>.csv`: `round,lambda,score2` (dual-actor runs only)
//! - `summary.csv`: `seed,final_score,avg_drawdown,promotions`
//! - `aggregate.csv`: `step,mean,std`
//!
//! Floats are written in shortest round-trip form, so a file is a pure
//! function of the numbers it holds.

use std::fs;
use std::path::{Path, PathBuf};

use cic_core::cic::LambdaTracePoint;
use cic_core::metrics::{CurvePoint, LearningCurve, RunSummary};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const META_FILE: &str = "meta.toml";
pub const PLOT_FILE: &str = "curve.svg";

pub fn curve_file(seed: u64) -> String {
    format!("seed{seed}.csv")
}

pub fn lambda_file(seed: u64) -> String {
    format!("lambda_seed{seed}.csv")
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    step: u64,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub final_score: f64,
    pub avg_drawdown: f64,
    pub promotions: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct LambdaRow {
    round: usize,
    lambda: f64,
    score2: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AggregateRow {
    pub step: u64,
    pub mean: f64,
    pub std: f64,
}

/// Evaluation settings stored next to the CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub env: String,
    pub variant: String,
    pub total_steps: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    pub seeds: Vec<u64>,
    pub fixed_lambda: Option<f64>,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.is_file() {
        return Err(HarnessError::schema(path, "file not found"));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::schema(path, e.to_string())
}

pub fn write_curve(path: &Path, curve: &LearningCurve) -> Result<()> {
    write_rows(path, curve.points.iter().map(|p| CurveRow { step: p.step, score: p.score }))
}

pub fn read_curve(path: &Path, eval_interval: u64, eval_episodes: usize) -> Result<LearningCurve> {
    let rows: Vec<CurveRow> = read_rows(path)?;
    if rows.is_empty() {
        return Err(HarnessError::schema(path, "no evaluation points"));
    }
    if rows.windows(2).any(|w| w[0].step >= w[1].step) {
        return Err(HarnessError::schema(path, "steps are not strictly increasing"));
    }
    let points = rows.into_iter().map(|r| CurvePoint { step: r.step, score: r.score }).collect();
    Ok(LearningCurve::from_points(points, eval_interval, eval_episodes))
}

pub fn write_lambda_trace(path: &Path, trace: &[LambdaTracePoint]) -> Result<()> {
    write_rows(path, trace.iter().map(|p| LambdaRow { round: p.round, lambda: p.lambda, score2: p.score2 }))
}

pub fn read_lambda_trace(path: &Path) -> Result<Vec<LambdaTracePoint>> {
    let rows: Vec<LambdaRow> = read_rows(path)?;
    Ok(rows.into_iter().map(|r| LambdaTracePoint { round: r.round, lambda: r.lambda, score2: r.score2 }).collect())
}

pub fn write_summary(path: &Path, runs: &[RunSummary]) -> Result<()> {
    write_rows(
        path,
        runs.iter().map(|s| SummaryRow {
            seed: s.seed,
            final_score: s.final_score,
            avg_drawdown: s.average_drawdown,
            promotions: s.promotion_count,
        }),
    )
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

pub fn write_aggregate(path: &Path, mean: &LearningCurve, std: &LearningCurve) -> Result<()> {
    write_rows(path, mean.points.iter().zip(&std.points).map(|(m, s)| AggregateRow { step: m.step, mean: m.score, std: s.score }))
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    read_rows(path)
}

pub fn write_meta(path: &Path, meta: &RunMeta) -> Result<()> {
    let text = toml::to_string(meta).map_err(|e| HarnessError::schema(path, e.to_string()))?;
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_meta(path: &Path) -> Result<RunMeta> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    toml::from_str(&text).map_err(|e| HarnessError::schema(path, e.to_string()))
}

/// Every `seed<k>.csv` in `dir`, ordered by seed.
pub fn seed_curves(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(seed) = name.strip_prefix("seed").and_then(|s| s.strip_suffix(".csv")).and_then(|s| s.parse().ok()) {
            found.push((seed, path));
        }
    }
    found.sort_by_key(|(s, _)| *s);
    if found.is_empty() {
        return Err(HarnessError::schema(dir, "no seed<k>.csv files"));
    }
    Ok(found)
}
