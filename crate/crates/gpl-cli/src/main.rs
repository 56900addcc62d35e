//! `gpl`: batch experiments on Gaussian-window spectrogram sampling.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gpl::experiments::{run, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "gpl", version, about = "Phase retrieval experiments on lattice spectrogram samples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare forward-model computations against closed forms and identities.
    ForwardCheck(Common),
    /// Draw pairs of class members and measure how well the samples separate them.
    UniquenessProbe(Common),
    /// Reconstruct synthetic signals from their samples, or samples read from disk.
    Reconstruct(Common),
    /// Evaluate the density and divergence hypotheses of a sampling set.
    DensityReport(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
}

impl Cmd {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Cmd::ForwardCheck(c) => (ExperimentKind::ForwardCheck, c),
            Cmd::UniquenessProbe(c) => (ExperimentKind::UniquenessProbe, c),
            Cmd::Reconstruct(c) => (ExperimentKind::Reconstruct, c),
            Cmd::DensityReport(c) => (ExperimentKind::DensityReport, c),
        }
    }
}

/// Thread cap from `GPL_THREADS`; unset or `0` means rayon's default.
fn threads() -> anyhow::Result<usize> {
    match std::env::var("GPL_THREADS") {
        Ok(v) => v.trim().parse().with_context(|| format!("GPL_THREADS={v:?} is not a thread count")),
        Err(_) => Ok(0),
    }
}

fn is_config_error(e: &gpl::Error) -> bool {
    !matches!(e, gpl::Error::Io(_))
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().cmd.split();
    let cfg = ExperimentConfig::load(&args.config).map(|mut c| {
        if let Some(s) = args.seed {
            c.seed = s;
        }
        if let Some(t) = args.trials {
            c.trials = t;
        }
        c
    });
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(if is_config_error(&e) { 2 } else { 1 });
        }
    };
    if cfg.trials == 0 {
        eprintln!("error: trials must be positive");
        return ExitCode::from(2);
    }
    cfg.experiment.get_or_insert(kind);

    let pool = match threads().and_then(|n| Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(kind, &cfg, &args.out)) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", args.out.join(f).display());
            }
            println!("status: {}", outcome.status.name());
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
