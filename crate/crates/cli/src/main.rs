use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hopetree::bench::{self, ExperimentSpec, Overrides};
use hopetree::metrics::SrerMean;
use hopetree::Error;

/// Monte-Carlo benchmarks for greedy sparse recovery.
#[derive(Debug, Parser)]
#[command(name = "hopetree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sweep and write trials.csv, summary.csv, metadata.toml and plot data.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Trials per sweep point (noisy runs: a multiple of signals_per_matrix).
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use full-scale trial counts instead of desk-scale ones.
        #[arg(long)]
        full_scale: bool,
        /// How SRER is averaged over a batch.
        #[arg(long, value_enum)]
        srer_mean_mode: Option<MeanMode>,
    },
    /// Compare GSRA and OMP with the exhaustive solver on small instances.
    OracleCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeanMode {
    /// dB of the ratio of summed energies.
    Energy,
    /// Mean of per-trial dB values.
    Db,
}

impl From<MeanMode> for SrerMean {
    fn from(m: MeanMode) -> Self {
        match m {
            MeanMode::Energy => SrerMean::Energy,
            MeanMode::Db => SrerMean::Db,
        }
    }
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentSpec, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ExperimentSpec::from_toml(&text, overrides).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::InvalidConfig(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_FAILURE),
    }
}

fn run(spec: ExperimentSpec) -> Result<(), Error> {
    let out = bench::run_experiment(&spec)?;
    let files = bench::write_outputs(&spec.output_dir, &out)?;
    let noisy = spec.protocol == bench::Protocol::NoisySrer;
    println!(
        "{:<8} {:>6} {:>4} {:>10} {:>10}",
        "algo",
        if noisy { "phi" } else { "m" },
        "k",
        if noisy { "srer_db" } else { "exact" },
        "mean_ms"
    );
    for row in &out.summary {
        let x = match row.point.phi {
            Some(phi) => format!("{phi:.2}"),
            None => row.point.m.to_string(),
        };
        let y = match row.srer_db {
            Some(db) => format!("{db:.2}"),
            None => format!("{:.3}", row.exact_frequency),
        };
        println!("{:<8} {x:>6} {:>4} {y:>10} {:>10.3}", row.algorithm, row.point.k, row.mean_wall_ms);
    }
    let failures: usize = out.summary.iter().map(|r| r.failures).sum();
    if failures > 0 {
        eprintln!("warning: {failures} trial(s) ended in a solver error; see trials.csv");
    }
    eprintln!("wrote {} files under {}", files.len(), spec.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            trials,
            seed,
            out,
            full_scale,
            srer_mean_mode,
        } => {
            let overrides = Overrides {
                trials,
                master_seed: seed,
                output_dir: out,
                full_scale,
                srer_mean: srer_mean_mode.map(Into::into),
            };
            match load(&config, &overrides).and_then(run) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Command::OracleCheck { config } => {
            let report = match load(&config, &Overrides::default()).and_then(|s| bench::oracle_check(&s)) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            println!(
                "gsra {}/{} ({:.3})  omp {}/{} ({:.3})  required {:.2}",
                report.gsra_matches,
                report.trials,
                report.gsra_rate(),
                report.omp_matches,
                report.trials,
                report.omp_rate(),
                report.min_agreement
            );
            if report.passed() {
                println!("PASS");
                ExitCode::SUCCESS
            } else {
                println!("FAIL");
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
    }
}
