use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use noma_lab::cli::{self, Overrides, Preset, RunConfig};

/// Outage/throughput sweeps for HDU-CNOMA and its baselines.
///
/// Flags override values from the config file. Set NOMA_LAB_WORKERS to cap
/// the worker thread count.
#[derive(Debug, Parser)]
#[command(name = "noma-lab", version)]
struct Args {
    /// JSON run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset (fig3 = outage, fig4 = throughput).
    #[arg(long, value_parser = ["fig3", "fig4"])]
    preset: Option<String>,
    /// Monte Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SNR grid in dB, as lo:hi:step.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
}

fn load(args: &Args) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            cli::parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let preset = args
        .preset
        .as_deref()
        .map(str::parse::<Preset>)
        .transpose()?;
    cfg.apply(&Overrides {
        preset,
        trials: args.trials,
        seed: args.seed,
        out: args.out.clone(),
        snr: args.snr.clone(),
    })?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = load(&args).and_then(|cfg| {
        let workers = cli::workers_from_env()?;
        Ok(cli::run(&cfg, workers)?)
    });
    match outcome {
        Ok(report) => {
            print!("{}", report.summary);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if let Some(e) = &report.failure {
                eprintln!("error: {e}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
