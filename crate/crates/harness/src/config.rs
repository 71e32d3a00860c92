//! Experiment configuration: a TOML file plus command-line overrides, resolved
//! against the per-algorithm defaults.

use std::path::{Path, PathBuf};

use cic_core::algos::{AlgoHyper, AlgoKind, TargetEntropy};
use cic_core::cic::CicConfig;
use cic_core::envs::EnvKind;
use cic_core::run::RunConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "CIC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "runs";

/// The file format. Every field may be omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub env: Option<String>,
    pub algo: Option<String>,
    pub cic: Option<bool>,
    pub fixed_lambda: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub total_steps: Option<u64>,
    pub eval_interval: Option<u64>,
    pub eval_episodes: Option<usize>,
    pub smoothing_window: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub hyper: HyperOverrides,
    #[serde(default)]
    pub cic_params: CicOverrides,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperOverrides {
    pub num_critics: Option<usize>,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub delay_frequency: Option<usize>,
    pub exploration_noise_std: Option<f64>,
    pub target_policy_noise_std: Option<f64>,
    pub policy_noise_clip: Option<[f64; 2]>,
    pub target_entropy: Option<f64>,
    pub log_std_clip: Option<[f64; 2]>,
    pub ensemble_subset_size: Option<usize>,
    pub warmup_steps: Option<u64>,
    pub utd_ratio: Option<usize>,
    pub actor_target: Option<bool>,
    pub hidden_sizes: Option<Vec<usize>>,
    pub replay_capacity: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CicOverrides {
    pub kappa: Option<usize>,
    pub lambda_buffer_size: Option<usize>,
    pub sigma: Option<f64>,
    pub actor1_episode_cap: Option<usize>,
    pub promotion: Option<bool>,
    pub evaluate_actor1: Option<bool>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CliOverrides {
    pub seeds: Option<Vec<u64>>,
    pub fixed_lambda: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A fully resolved, validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub algo: AlgoKind,
    pub cic: bool,
    pub fixed_lambda: Option<f64>,
    pub seeds: Vec<u64>,
    pub run: RunConfig,
    pub hyper: AlgoHyper,
    pub cic_config: CicConfig,
    pub smoothing_window: usize,
    pub out_root: PathBuf,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Apply overrides and defaults; `default_out` is used when neither the
    /// CLI nor the file names an output root.
    pub fn resolve(&self, cli: &CliOverrides, default_out: &Path) -> Result<ExperimentConfig> {
        let env: EnvKind = self.env.as_deref().unwrap_or("pendulum").parse()?;
        let algo: AlgoKind = self.algo.as_deref().unwrap_or("td3").parse()?;
        let cic = self.cic.unwrap_or(false);
        let fixed_lambda = cli.fixed_lambda.or(self.fixed_lambda);
        if fixed_lambda.is_some() && !cic {
            return Err(HarnessError::Config("fixed_lambda requires cic = true".into()));
        }
        let seeds = cli.seeds.clone().or_else(|| self.seeds.clone()).unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(HarnessError::Config("seed list is empty".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::Config(format!("duplicate seeds in {seeds:?}")));
        }
        let defaults = RunConfig::default();
        let run = RunConfig {
            total_steps: self.total_steps.unwrap_or(defaults.total_steps),
            eval_interval: self.eval_interval.unwrap_or(defaults.eval_interval),
            eval_episodes: self.eval_episodes.unwrap_or(defaults.eval_episodes),
        };
        run.validate()?;
        if run.total_steps < run.eval_interval {
            return Err(HarnessError::Config("total_steps is shorter than one evaluation interval".into()));
        }
        let hyper = self.hyper.apply(AlgoHyper::defaults(algo))?;
        let mut cic_config = self.cic_params.apply(CicConfig::defaults(algo));
        cic_config.fixed_lambda = fixed_lambda;
        cic_config.validate()?;
        let smoothing_window = self.smoothing_window.unwrap_or(5);
        if smoothing_window == 0 {
            return Err(HarnessError::Config("smoothing_window must be positive".into()));
        }
        let out_root = cli.out.clone().or_else(|| self.out.clone()).unwrap_or_else(|| default_out.to_path_buf());
        Ok(ExperimentConfig { env, algo, cic, fixed_lambda, seeds, run, hyper, cic_config, smoothing_window, out_root })
    }
}

impl HyperOverrides {
    fn apply(&self, mut h: AlgoHyper) -> Result<AlgoHyper> {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { h.$f = v; } )* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { h.$f = Some(v.into()); } )* };
        }
        set!(num_critics, gamma, tau, batch_size, learning_rate, warmup_steps, utd_ratio, actor_target, hidden_sizes, replay_capacity);
        set_opt!(delay_frequency, exploration_noise_std, target_policy_noise_std, ensemble_subset_size);
        if let Some([lo, hi]) = self.policy_noise_clip {
            h.policy_noise_clip = Some((lo, hi));
        }
        if let Some([lo, hi]) = self.log_std_clip {
            h.log_std_clip = Some((lo, hi));
        }
        if let Some(t) = self.target_entropy {
            h.target_entropy = Some(TargetEntropy::Fixed(t));
        }
        h.validate()?;
        Ok(h)
    }
}

impl CicOverrides {
    fn apply(&self, mut c: CicConfig) -> CicConfig {
        c.kappa = self.kappa.unwrap_or(c.kappa);
        c.lambda_buffer_size = self.lambda_buffer_size.unwrap_or(c.lambda_buffer_size);
        c.sigma = self.sigma.unwrap_or(c.sigma);
        c.actor1_episode_cap = self.actor1_episode_cap.unwrap_or(c.actor1_episode_cap);
        c.promotion = self.promotion.unwrap_or(c.promotion);
        c.evaluate_actor1 = self.evaluate_actor1.unwrap_or(c.evaluate_actor1);
        c
    }
}

/// `$CIC_OUT_DIR`, or `runs` in the working directory.
pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

impl ExperimentConfig {
    /// `<algo>[-cic][-lambda<x>]`; fixed-lambda runs get their own directory.
    pub fn variant_name(&self) -> String {
        let mut name = self.algo.name().to_string();
        if self.cic {
            name.push_str("-cic");
        }
        if let Some(l) = self.fixed_lambda {
            name.push_str(&format!("-lambda{l}"));
        }
        name
    }

    /// `<out>/<variant>/<env>`.
    pub fn run_dir(&self) -> PathBuf {
        self.out_root.join(self.variant_name()).join(self.env.name())
    }
}
