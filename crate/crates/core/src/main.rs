use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dnnclass::harness::{execute, Command, Config, Fault, RunOptions};
use dnnclass::theory::{Extended, RateCase, RateSpec};
use dnnclass::Error;

#[derive(Parser)]
#[command(
    name = "dnnclass",
    version,
    about = "Sparse ReLU network classifiers: constructions, rates and studies"
)]
struct Cli {
    /// TOML configuration file; omitted keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Deliberate defect for checking that verify can fail (horizon-gap).
    #[arg(long, global = true)]
    inject_fault: Option<Fault>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the property and inequality suites.
    Verify,
    /// Train across a grid of sample sizes and fit the excess-risk decay.
    RateStudy,
    /// Hinge vs logistic test accuracy on the extreme-probability task.
    LossCompare,
    /// Histogram of logistic-network class probabilities.
    CondEHist,
    /// Print the architecture schedule for a rate specification.
    Schedule(ScheduleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    SmoothBoundary,
    SmoothEta,
    Margin,
    CrossEntropy,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Noise exponent; `inf` allowed.
    #[arg(long, value_parser = parse_extended)]
    q: Option<Extended>,
    /// Margin exponent; `inf` allowed.
    #[arg(long, value_parser = parse_extended)]
    gamma: Option<Extended>,
    #[arg(long)]
    d: Option<usize>,
    /// Sample sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
}

fn parse_extended(s: &str) -> Result<Extended, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Extended::Infinity);
    }
    s.parse::<f64>()
        .map(Extended::Finite)
        .map_err(|e| e.to_string())
}

impl ScheduleArgs {
    fn spec(&self) -> Result<Option<RateSpec>, Error> {
        let Some(case) = self.case else {
            if self.alpha.is_some()
                || self.beta.is_some()
                || self.q.is_some()
                || self.gamma.is_some()
                || self.d.is_some()
            {
                return Err(Error::Config(
                    "--case is required with rate parameters".into(),
                ));
            }
            return Ok(None);
        };
        let d = self
            .d
            .ok_or_else(|| Error::Config("--d is required".into()))?;
        let spec = RateSpec {
            case: match case {
                CaseArg::SmoothBoundary => RateCase::SmoothBoundary,
                CaseArg::SmoothEta => RateCase::SmoothEta,
                CaseArg::Margin => RateCase::Margin,
                CaseArg::CrossEntropy => RateCase::CrossEntropy,
            },
            alpha: self.alpha,
            beta: self.beta,
            q: self.q,
            gamma: self.gamma,
            d,
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(Some(spec))
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
            other => other,
        })?,
        None => Config::default(),
    };
    let command = match &cli.command {
        Sub::Verify => Command::Verify,
        Sub::RateStudy => Command::RateStudy,
        Sub::LossCompare => Command::LossCompare,
        Sub::CondEHist => Command::CondEHist,
        Sub::Schedule(args) => Command::Schedule {
            spec: args.spec()?,
            n_grid: args.n.clone(),
        },
    };
    if cli.jobs == Some(0) {
        return Err(Error::Config("--jobs must be positive".into()));
    }
    let opts = RunOptions {
        seed: cli.seed,
        jobs: cli.jobs,
        out: Some(cli.out),
        fault: cli.inject_fault,
    };
    let outcome = execute(&command, &config, &opts)?;
    print!("{}", outcome.summary);
    for note in &outcome.manifest.notes {
        eprintln!("note: {note}");
    }
    Ok(outcome.success)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Config(_) | Error::Input(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
