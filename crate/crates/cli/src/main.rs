//! `rbd`: evaluate, simulate and analyse reliability block diagrams from the
//! command line.
//!
//! Exit status is 0 on success, 1 when the model cannot be read, parsed or
//! analysed, and 2 on a usage error.

mod report;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rbdkit::analysis::{rank_instances, whatif_redundancy, RankMeasure};
use rbdkit::analytic::{self, evaluate, instance_reliabilities, unreliability};
use rbdkit::dsl::{self, ParseError};
use rbdkit::montecarlo::{estimate_reliability, estimate_survival_curve, SimulationConfig};
use rbdkit::{validate_model, MissionTime, Mttf, SystemModel};

use report::{
    CurvePoint, CurveReport, EvalReport, InstanceRow, MttfMethod, MttfReport, RankReport, RankRow, Render,
    SimulateReport, WhatIfReport,
};

const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Parser)]
#[command(name = "rbd", version, about = "Reliability block diagram calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// System reliability, unreliability and per-instance reliabilities at a mission time
    Eval {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        time: Time,
    },
    /// Monte Carlo estimate of system reliability next to the analytic value
    Simulate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        time: Time,
        #[command(flatten)]
        sim: Simulation,
        /// Two-sided confidence level of the reported interval
        #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
        confidence: f64,
    },
    /// Rank instances by reliability (weakest first) or Birnbaum importance
    Rank {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        time: Time,
        #[arg(long, value_enum, default_value_t = Measure::Reliability)]
        measure: Measure,
    },
    /// Effect of replacing one instance with N parallel copies
    Whatif {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        time: Time,
        /// Instance to duplicate, as `id` or `id[index]`
        #[arg(long, value_name = "INSTANCE")]
        duplicate: String,
        /// Number of parallel copies replacing the instance
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..))]
        copies: u32,
    },
    /// Mean time to failure
    Mttf {
        #[command(flatten)]
        input: Input,
    },
    /// Reliability over an evenly spaced time grid, for plotting
    Curve {
        #[command(flatten)]
        input: Input,
        /// First grid point in hours
        #[arg(long, default_value_t = 0.0, value_parser = parse_hours)]
        from: f64,
        /// Last grid point in hours
        #[arg(long, default_value_t = 1000.0, value_parser = parse_hours)]
        to: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
        /// Also estimate each point by simulation with this many trials
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: Option<u64>,
        /// Seed for the simulated columns
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the JSON schema that every `--format json` report conforms to
    Schema,
}

#[derive(Args)]
struct Input {
    /// Model file
    model: PathBuf,
    #[arg(long, short, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct Time {
    /// Mission time in hours
    #[arg(long, short, default_value_t = 1000.0, value_parser = parse_hours)]
    time: f64,
}

#[derive(Args)]
struct Simulation {
    /// Number of simulated system lifetimes
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Reliability,
    Birnbaum,
}

fn parse_hours(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err("must be a finite, non-negative number of hours".into())
    }
}

fn parse_level(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err("must lie strictly between 0 and 1".into())
    }
}

#[derive(Debug)]
enum CliError {
    Read(PathBuf, io::Error),
    Parse(PathBuf, ParseError),
    Analysis(rbdkit::Error),
    Output(io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Read(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Parse(path, e) => write!(f, "{}:{e}", path.display()),
            CliError::Analysis(e) => write!(f, "error: {e}"),
            CliError::Output(e) => write!(f, "error: writing output: {e}"),
        }
    }
}

impl From<rbdkit::Error> for CliError {
    fn from(e: rbdkit::Error) -> Self {
        CliError::Analysis(e)
    }
}

impl From<rbdkit::ModelError> for CliError {
    fn from(e: rbdkit::ModelError) -> Self {
        CliError::Analysis(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

/// Reads and parses a model, echoing validation warnings to stderr.
fn load(path: &Path) -> Result<SystemModel, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Read(path.to_path_buf(), e))?;
    let model = dsl::parse_bytes(&bytes).map_err(|e| CliError::Parse(path.to_path_buf(), e))?;
    for w in validate_model(&model).warnings() {
        match w.position {
            Some(_) => eprintln!("{}:{w}", path.display()),
            None => eprintln!("{}: {w}", path.display()),
        }
    }
    Ok(model)
}

fn hours(t: f64) -> MissionTime {
    MissionTime::hours(t).expect("checked by the argument parser")
}

fn emit(report: &impl Render, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Table => report.table(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => report.csv().map_err(|e| CliError::Output(e.into()))?,
    };
    io::stdout().lock().write_all(text.as_bytes()).map_err(CliError::Output)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Eval { input, time } => {
            let model = load(&input.model)?;
            let t = hours(time.time);
            let instances = instance_reliabilities(&model, t)?
                .into_iter()
                .map(|(id, reliability)| InstanceRow::new(&id, reliability))
                .collect();
            let report = EvalReport {
                command: "eval",
                model: model.name().to_string(),
                mission_time: time.time,
                reliability: evaluate(&model, t)?,
                unreliability: unreliability(&model, t)?,
                instances,
            };
            emit(&report, input.format)
        }
        Command::Simulate {
            input,
            time,
            sim,
            confidence,
        } => {
            let model = load(&input.model)?;
            let t = hours(time.time);
            let cfg = SimulationConfig::new(sim.trials, sim.seed).with_confidence_level(confidence);
            let est = estimate_reliability(&model, t, &cfg)?;
            let analytic = evaluate(&model, t)?;
            let report = SimulateReport {
                command: "simulate",
                model: model.name().to_string(),
                mission_time: time.time,
                point: est.point,
                std_error: est.std_error,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                confidence_level: confidence,
                trials: est.trials,
                seed: est.seed,
                analytic,
                difference: est.point - analytic,
            };
            emit(&report, input.format)
        }
        Command::Rank { input, time, measure } => {
            let model = load(&input.model)?;
            let measure = match measure {
                Measure::Reliability => RankMeasure::ByReliabilityAscending,
                Measure::Birnbaum => RankMeasure::ByBirnbaumDescending,
            };
            let ranked = rank_instances(&model, hours(time.time), measure)?;
            let rows = ranked
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| RankRow::new(i + 1, &r.instance, r.reliability, r.birnbaum))
                .collect();
            let report = RankReport {
                command: "rank",
                model: model.name().to_string(),
                mission_time: time.time,
                measure: ranked.measure,
                rows,
            };
            emit(&report, input.format)
        }
        Command::Whatif {
            input,
            time,
            duplicate,
            copies,
        } => {
            let model = load(&input.model)?;
            let instance = model.resolve_instance(&duplicate)?;
            let w = whatif_redundancy(&model, &instance, copies as usize, hours(time.time))?;
            let report = WhatIfReport {
                command: "whatif",
                model: model.name().to_string(),
                mission_time: time.time,
                instance: instance.to_string(),
                copies,
                baseline_reliability: w.baseline_reliability,
                modified_reliability: w.modified_reliability,
                delta: w.delta,
                modified_model: dsl::serialize(&w.modified_model),
            };
            emit(&report, input.format)
        }
        Command::Mttf { input } => {
            let model = load(&input.model)?;
            let mttf = analytic::mttf(&model)?;
            let method = if model.root().is_pure_series() {
                MttfMethod::ClosedForm
            } else {
                MttfMethod::Quadrature
            };
            let report = MttfReport {
                command: "mttf",
                model: model.name().to_string(),
                mttf_hours: mttf.hours(),
                infinite: mttf == Mttf::Infinite,
                method,
            };
            emit(&report, input.format)
        }
        Command::Curve {
            input,
            from,
            to,
            points,
            trials,
            seed,
        } => {
            if to < from {
                Cli::command()
                    .error(ErrorKind::ValueValidation, "--to must not be earlier than --from")
                    .exit();
            }
            let model = load(&input.model)?;
            let n = points as usize;
            let grid: Vec<f64> = (0..n)
                .map(|i| {
                    if i + 1 == n {
                        to
                    } else {
                        from + (to - from) * i as f64 / (n - 1) as f64
                    }
                })
                .collect();
            let times: Vec<MissionTime> = grid.iter().map(|&t| hours(t)).collect();
            let simulated = match trials {
                Some(trials) => Some(estimate_survival_curve(
                    &model,
                    &times,
                    &SimulationConfig::new(trials, seed),
                )?),
                None => None,
            };
            let mut curve = Vec::with_capacity(n);
            for (i, &t) in times.iter().enumerate() {
                let est = simulated.as_ref().map(|s| s[i]);
                curve.push(CurvePoint {
                    time: t.as_hours(),
                    reliability: evaluate(&model, t)?,
                    unreliability: unreliability(&model, t)?,
                    simulated: est.map(|e| e.point),
                    std_error: est.map(|e| e.std_error),
                });
            }
            let report = CurveReport {
                command: "curve",
                model: model.name().to_string(),
                trials,
                seed: trials.map(|_| seed),
                points: curve,
            };
            emit(&report, input.format)
        }
        Command::Schema => io::stdout()
            .lock()
            .write_all(SCHEMA.as_bytes())
            .map_err(CliError::Output),
    }
}
