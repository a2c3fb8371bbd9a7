use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use segrr::harness::{self, ExperimentConfig, VerifyOptions};
use segrr::problems::ProblemConstants;
use segrr::schedules::{horizon_stepsize, max_stepsize, TheoremRegime};
use segrr::Error;

/// Stochastic extragradient benchmark driver.
#[derive(Parser)]
#[command(name = "segrr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured problem instance as JSON.
    Generate(IoArgs),
    /// Run the first configured seed and write its per-epoch CSV.
    Solve(RunArgs),
    /// Run every configured seed and write the aggregate CSV.
    Bench(RunArgs),
    /// Run the built-in consistency checks.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Print theoretical step sizes for given constants.
    Stepsize(StepsizeArgs),
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Comma-separated run seeds, replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Number of epochs, replacing `K`.
    #[arg(long)]
    epochs: Option<u64>,
}

#[derive(Args)]
struct StepsizeArgs {
    #[arg(long, value_parser = parse_regime)]
    regime: TheoremRegime,
    #[arg(long)]
    n: usize,
    #[arg(long = "l-max")]
    l_max: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long)]
    lambda: Option<f64>,
    /// Total epochs for the horizon-aware rule.
    #[arg(long = "K")]
    horizon: Option<u64>,
}

fn parse_regime(s: &str) -> Result<TheoremRegime, String> {
    s.parse()
        .map_err(|_| format!("unknown regime `{s}` (strongly-monotone, affine, monotone)"))
}

enum Failure {
    Error(Error),
    AllDiverged,
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Error(
            Error::Config { .. }
            | Error::Parse(_)
            | Error::Parameter(_)
            | Error::RegimeMismatch(_)
            | Error::Validation(_)
            | Error::Infeasible { .. },
        ) => 2,
        Failure::AllDiverged => 3,
        Failure::Verification => 4,
        Failure::Error(_) => 1,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = harness::parse_config(&read(&args.io.config)?)?;
    if let Some(seeds) = &args.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(k) = args.epochs {
        cfg.epochs = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_path<'a>(io: &'a IoArgs, cfg: &'a ExperimentConfig) -> Option<&'a Path> {
    io.out.as_deref().or(cfg.output.as_deref())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(io) => {
            let cfg = harness::parse_config(&read(&io.config)?)?;
            let problem = cfg.build_problem()?;
            let mut text = problem.to_json();
            text.push('\n');
            write_out(io.out.as_deref(), &text)?;
        }
        Command::Solve(args) => {
            let mut cfg = load(&args)?;
            cfg.seeds.truncate(1);
            let record = harness::run_experiment(&cfg)?;
            report_failures(&record);
            if record.all_failed() {
                return Err(Failure::AllDiverged);
            }
            write_out(out_path(&args.io, &cfg), &harness::to_csv_string(&record))?;
        }
        Command::Bench(args) => {
            let cfg = load(&args)?;
            let record = harness::run_experiment(&cfg)?;
            report_failures(&record);
            if record.all_failed() {
                return Err(Failure::AllDiverged);
            }
            write_out(out_path(&args.io, &cfg), &harness::to_csv_string(&record))?;
        }
        Command::Verify { seed } => {
            let report = harness::run_verification(VerifyOptions {
                seed,
                ..Default::default()
            })?;
            for c in &report.checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
        Command::Stepsize(a) => {
            let constants = ProblemConstants {
                l_i: vec![a.l_max],
                l_max: a.l_max,
                l: a.l_max,
                mu: a.mu,
                lambda_min_plus: a.lambda,
                a: 2.0 * a.l_max * a.l_max,
                sigma_star_sq: 0.0,
                kappa: None,
            };
            let pair = match a.horizon {
                Some(k) => horizon_stepsize(a.regime, &constants, a.n, k)?,
                None => max_stepsize(a.regime, &constants, a.n)?,
            };
            println!("gamma1 {:.16e}", pair.gamma1);
            println!("gamma2 {:.16e}", pair.gamma2);
        }
    }
    Ok(())
}

fn report_failures(record: &harness::AggregateRecord) {
    for f in &record.failures {
        eprintln!("seed {}: {}", f.seed, f.message);
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Error(e) => eprintln!("error: {e}"),
                Failure::AllDiverged => eprintln!("error: every seed diverged"),
                Failure::Verification => eprintln!("error: verification failed"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
