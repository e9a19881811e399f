//! Command line front end. All the physics lives in the homlab library;
//! this binary resolves configs, seeds, and the thread pool, then prints
//! what the run produced.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use homlab::config::{parse_config, ConfigKind, Job, SamplesSpec};
use homlab::experiments::{execute, execute_complementarity_pair};
use homlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "homlab",
    about = "Interference bench for classical pulse pairs and photon pairs",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file; built-in defaults are used when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the seed in the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Directory the output files are written to
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the coincidence dip for phase-randomized classical pulse pairs
    ClassicalDip {
        #[command(flatten)]
        common: CommonArgs,
        /// Route the pulses through the mixer chain instead of the
        /// analytic signal path
        #[arg(long)]
        rf_chain: bool,
        /// Per-delay ensemble size: a positive integer or "auto"
        #[arg(long, value_name = "N|auto")]
        samples: Option<String>,
    },
    /// Scan the coincidence dip for the two-photon counts model
    QuantumDip {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare blocked/open interferometer ratios; without a config,
    /// runs the classical and quantum cases side by side
    Complementarity {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Coincidence fringe of the two-photon interferometer versus phase
    MziScan {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fit a counts model or a dip model to a measured curve
    Fit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Minimum ensemble size for a target confidence half-width
    MinN {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Percentile bootstrap interval for the mean of a value column
    Bootstrap {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::ClassicalDip {
            common,
            rf_chain,
            samples,
        } => {
            let (mut job, seed) = resolve(&common, &[ConfigKind::ClassicalDip])?;
            if let Some(text) = samples {
                let spec = SamplesSpec::parse(&text)?;
                if let Job::ClassicalDip(cfg) = &mut job {
                    cfg.samples = spec;
                }
            }
            report(execute(&job, seed, rf_chain, &common.out)?)
        }
        Command::QuantumDip { common } => {
            let (job, seed) = resolve(&common, &[ConfigKind::QuantumDip])?;
            report(execute(&job, seed, false, &common.out)?)
        }
        Command::Complementarity { common } => match &common.config {
            Some(_) => {
                let (job, seed) = resolve(
                    &common,
                    &[
                        ConfigKind::ComplementarityClassical,
                        ConfigKind::ComplementarityQuantum,
                    ],
                )?;
                report(execute(&job, seed, false, &common.out)?)
            }
            None => {
                let seed = common.seed.unwrap_or(0);
                report(execute_complementarity_pair(seed, &common.out)?)
            }
        },
        Command::MziScan { common } => {
            let (job, seed) = resolve(&common, &[ConfigKind::MziScan])?;
            report(execute(&job, seed, false, &common.out)?)
        }
        Command::Fit { common } => {
            let (job, seed) = resolve(&common, &[ConfigKind::Fit])?;
            report(execute(&job, seed, false, &common.out)?)
        }
        Command::MinN { common } => {
            let (job, seed) = resolve(&common, &[ConfigKind::MinN])?;
            report(execute(&job, seed, false, &common.out)?)
        }
        Command::Bootstrap { common } => {
            let (job, seed) = resolve(&common, &[ConfigKind::Bootstrap])?;
            report(execute(&job, seed, false, &common.out)?)
        }
    }
}

/// Load the job from the config file, or fall back to the subcommand's
/// default. The effective seed is the flag, else the config, else zero.
fn resolve(common: &CommonArgs, allowed: &[ConfigKind]) -> Result<(Job, u64)> {
    match &common.config {
        Some(path) => {
            let experiment = parse_config(path)?;
            let kind = experiment.job.kind();
            if !allowed.contains(&kind) {
                return Err(Error::config(
                    "kind",
                    format!("config kind {} does not match this subcommand", kind.name()),
                ));
            }
            let seed = common.seed.or(experiment.seed).unwrap_or(0);
            Ok((experiment.job, seed))
        }
        None => {
            let job = Job::default_for(allowed[0])?;
            Ok((job, common.seed.unwrap_or(0)))
        }
    }
}

fn report(summary: homlab::experiments::ExecutionSummary) -> Result<()> {
    println!("{}", summary.headline);
    for file in summary.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

/// Cap the rayon pool when HOMLAB_THREADS is set. Results do not depend
/// on the pool size; this only bounds CPU use.
fn init_threads() -> Result<()> {
    let value = match std::env::var("HOMLAB_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(_) => {
            return Err(Error::config("HOMLAB_THREADS", "must be valid unicode"));
        }
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config("HOMLAB_THREADS", "must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::domain(format!("thread pool setup failed: {e}")))?;
    Ok(())
}
