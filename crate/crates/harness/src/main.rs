use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use cic_harness::config::default_out_root;
use cic_harness::report::{compare, format_table, plot_dir};
use cic_harness::{run_experiment, sweep, CliOverrides, Execution, FileConfig};
use clap::{Args, Parser, Subcommand};

/// Train and compare actor-critic agents with and without the dual-actor scheme.
#[derive(Parser)]
#[command(name = "cic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment over its seed list.
    Run(RunArgs),
    /// Run the dual-actor variant with lambda fixed at 0, 0.5, 1 and adaptive.
    Sweep(RunArgs),
    /// Tabulate final score and average drawdown of run directories.
    Compare {
        /// Run directories, each holding meta.toml and per-seed CSVs.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Overlay plot destination.
        #[arg(long, default_value = "comparison.svg")]
        svg: PathBuf,
        /// Moving-average window of the plotted means.
        #[arg(long, default_value_t = 5)]
        window: usize,
    },
    /// Redraw the plots of a run directory from its CSVs.
    Plot {
        dir: PathBuf,
        /// Moving-average window of the plotted mean.
        #[arg(long, default_value_t = 5)]
        window: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, replacing the file's list.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Hold the mixing ratio at this value instead of adapting it.
    #[arg(long)]
    fixed_lambda: Option<f64>,
    /// Output root; defaults to $CIC_OUT_DIR or ./runs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seeds one after another on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<(cic_harness::ExperimentConfig, Execution)> {
        let file = FileConfig::load(&self.config)?;
        let cli = CliOverrides { seeds: self.seed_list.clone(), fixed_lambda: self.fixed_lambda, out: self.out.clone() };
        let cfg = file.resolve(&cli, &default_out_root())?;
        let exec = if self.sequential { Execution::Sequential } else { Execution::Parallel };
        Ok((cfg, exec))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let (cfg, exec) = args.resolve()?;
            let report = run_experiment(&cfg, exec).context("experiment failed")?;
            println!("wrote {}", report.dir.display());
        }
        Command::Sweep(args) => {
            let (cfg, exec) = args.resolve()?;
            let report = sweep(&cfg, exec).context("sweep failed")?;
            for r in &report.reports {
                println!("wrote {}", r.dir.display());
            }
            println!("wrote {}", report.plot.display());
        }
        Command::Compare { dirs, svg, window } => {
            let rows = compare(&dirs, &svg, window)?;
            print!("{}", format_table(&rows));
            println!("wrote {}", svg.display());
        }
        Command::Plot { dir, window } => {
            for path in plot_dir(&dir, window)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
