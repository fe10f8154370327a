//! `mmac` — CSV reports for massive multiple-access limits: sum rates,
//! error exponents, feasibility queries, and hardening diagnostics.
//!
//! All substance lives in the library; this binary parses flags, loads the
//! scenario, runs one report, and delivers it to stdout or `--out`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use mmac::experiments::{self, RegionFile, Units};
use mmac::scenario::Scenario;
use mmac::{Error, Result};

#[derive(Parser)]
#[command(name = "mmac", version, about = "Fundamental limits of massive multiple access")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Scenario JSON file (default: the built-in cell-scale reference setup)
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Override the scenario's master seed
    #[arg(long)]
    seed: Option<u64>,

    /// Write the CSV here (plus a plotting stub next to it) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override both Monte-Carlo trial counts
    #[arg(long)]
    trials: Option<usize>,

    /// Worker threads (default: $MMAC_WORKERS, then all cores)
    #[arg(long)]
    workers: Option<usize>,

    /// Report rates and exponents in bits instead of nats
    #[arg(long)]
    bits: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sum rate against the deterministic large-system value
    Rate(CommonOpts),
    /// Error-exponent sweep over (n, event rule, rho, epsilon)
    Exponent(CommonOpts),
    /// Message-length feasibility queries against a sum rate
    Region {
        /// Query JSON file
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sum-rate sweep over the scenario's antenna configurations
    Fig2(CommonOpts),
    /// Sum-rate sweep over receive antenna counts
    Fig3(CommonOpts),
    /// Channel-hardening diagnostics over population size
    Hardening(CommonOpts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rate(_) => "rate",
            Command::Exponent(_) => "exponent",
            Command::Region { .. } => "region",
            Command::Fig2(_) => "fig2",
            Command::Fig3(_) => "fig3",
            Command::Hardening(_) => "hardening",
        }
    }

    fn common(&self) -> &CommonOpts {
        match self {
            Command::Rate(c)
            | Command::Exponent(c)
            | Command::Fig2(c)
            | Command::Fig3(c)
            | Command::Hardening(c) => c,
            Command::Region { common, .. } => common,
        }
    }
}

fn load_scenario(common: &CommonOpts) -> Result<Scenario> {
    let scenario = match &common.scenario {
        Some(path) => Scenario::from_path(path)?,
        None => Scenario::default(),
    };
    scenario.with_overrides(common.seed, common.trials)
}

/// Install the global worker pool: `--workers` wins, then `$MMAC_WORKERS`,
/// then rayon's default (all cores).
fn configure_workers(flag: Option<usize>) -> Result<()> {
    let requested = match flag {
        Some(w) => Some(w),
        None => match std::env::var("MMAC_WORKERS") {
            Ok(value) => Some(value.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!(
                    "MMAC_WORKERS must be a positive integer, got {value:?}"
                ))
            })?),
            Err(std::env::VarError::NotPresent) => None,
            Err(e) => return Err(Error::Config(format!("MMAC_WORKERS: {e}"))),
        },
    };
    if let Some(workers) = requested {
        if workers == 0 {
            return Err(Error::Config("worker count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Config(format!("could not configure {workers} workers: {e}")))?;
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn deliver(report: &str, subcommand: &str, out: Option<&Path>) -> Result<()> {
    let Some(path) = out else {
        print!("{report}");
        return Ok(());
    };
    write_file(path, report)?;
    eprintln!("wrote {}", path.display());
    let csv_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    if let Some(stub) = experiments::plot_stub(subcommand, &csv_name) {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let stub_path = path.with_file_name(format!(
            "{}_plot.py",
            stem.as_deref().unwrap_or("report")
        ));
        write_file(&stub_path, &stub)?;
        eprintln!("wrote {}", stub_path.display());
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let common = cli.command.common();
    configure_workers(common.workers)?;
    let units = if common.bits { Units::Bits } else { Units::Nats };
    let report = match &cli.command {
        Command::Rate(c) => experiments::run_rate(&load_scenario(c)?, units)?,
        Command::Exponent(c) => experiments::run_exponent_sweep(&load_scenario(c)?, units)?,
        Command::Fig2(c) => experiments::run_fig2(&load_scenario(c)?, units)?,
        Command::Fig3(c) => experiments::run_fig3(&load_scenario(c)?, units)?,
        Command::Hardening(c) => experiments::run_hardening(&load_scenario(c)?, units)?,
        Command::Region { query, common } => {
            let file = RegionFile::from_path(query)?;
            // Binding a scenario is opt-in: it adds the population-size
            // consistency check against k_n.
            let scenario = match &common.scenario {
                Some(_) => Some(load_scenario(common)?),
                None => None,
            };
            experiments::query_region(&file, scenario.as_ref(), units)?
        }
    };
    deliver(&report, cli.command.name(), common.out.as_deref())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
