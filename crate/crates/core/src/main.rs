use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rvcast_core::cli::{cmd_backtest, cmd_plot, cmd_summarize, render_summary, RunConfig};
use rvcast_core::Error;

#[derive(Parser)]
#[command(name = "rvcast", version, about = "Realized-volatility forecasting and model comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics and diagnostic tests for returns and RV.
    Summarize(Common),
    /// Rolling-window forecasts, losses, metadata and plots.
    Backtest(Common),
    /// Re-draws SVG charts from an existing backtest output directory.
    Plot {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| common.config.parent().unwrap_or(Path::new(".")).join(o)))
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `output`".into()))?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Summarize(c) => {
            let (cfg, out) = load(&c)?;
            let rows = cmd_summarize(&cfg, &out)?;
            print!("{}", render_summary(&rows));
        }
        Command::Backtest(c) => {
            let (cfg, out) = load(&c)?;
            let res = cmd_backtest(&cfg, &out)?;
            for f in res.files {
                println!("{}", f.display());
            }
        }
        Command::Plot { out, .. } => {
            for f in cmd_plot(&out)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
