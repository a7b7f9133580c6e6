mod commands;
mod exit;
mod report;
mod spec;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::exit::{CliError, Code};
use crate::report::{boundary_csv, emit, to_value, write_atomic, RunReport, Verdict};
use crate::spec::{load_spec, SpecFile};

#[derive(Parser)]
#[command(
    name = "covert",
    version,
    about = "One-shot covert communication bounds, regions and simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct Common {
    /// JSON problem spec.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Distance or divergence between two named states of the spec.
    Divergence(DivergenceArgs),
    /// One-shot bounds at the spec's rate point.
    Bound(BoundArgs),
    /// Rate regions, the causal rate and the single-rate corollaries.
    Region(RegionArgs),
    /// Monte Carlo run of the one-shot protocol or the classical block code.
    Simulate(SimulateArgs),
    /// Invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Trace,
    Fidelity,
    Purified,
    Relative,
    Sandwiched,
    All,
}

#[derive(Args, Serialize)]
struct DivergenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long)]
    rho: String,
    #[arg(long)]
    sigma: String,
    #[arg(long, value_enum, default_value_t = Measure::All)]
    measure: Measure,
    /// Order of the sandwiched Rényi divergence.
    #[arg(long, default_value_t = 1.25)]
    order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundWhich {
    Thm1,
    Thm5,
    Lemma1,
    Lemma2,
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = BoundWhich::Thm1)]
    which: BoundWhich,
    /// Overrides the spec's α.
    #[arg(long, conflicts_with = "optimize")]
    alpha: Option<f64>,
    /// Also minimize over the (α, R_J) grid.
    #[arg(long)]
    optimize: bool,
    /// Measure covertness against ρ_E instead of ρ₀.
    #[arg(long)]
    stealth: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum RegionWhich {
    CcCsk,
    CscCsk,
    Thm3,
    Thm4,
    Thm6,
    Causal,
    Corollaries,
}

#[derive(Args, Serialize)]
struct RegionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    which: RegionWhich,
    #[arg(long)]
    stealth: bool,
    /// Search the auxiliary policy instead of evaluating the spec's (classical only).
    #[arg(long)]
    optimize: bool,
    /// Search seed; overrides the spec's.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of weight directions in the boundary sweep.
    #[arg(long, default_value_t = 9)]
    sweep: usize,
    /// Boundary CSV path; defaults to the report path with a .csv extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimTarget {
    Quantum,
    Classical,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Defaults to the spec's kind.
    #[arg(long, value_enum)]
    which: Option<SimTarget>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Codebook size cap.
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Pinching,
    Dataprocessing,
    Fm,
    Reduction,
    All,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    which: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cases per suite.
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

fn require_spec(common: &Common) -> Result<SpecFile, CliError> {
    let path = common
        .spec
        .as_deref()
        .ok_or_else(|| CliError::run("--spec is required for this command"))?;
    load_spec(path)
}

fn run_verify(args: &VerifyArgs, spec: Option<&SpecFile>) -> Result<commands::Outcome, CliError> {
    let extra = match spec {
        Some(s) if s.quantum.is_some() => Some(s.quantum()?.build(&s.numerics)?.instance.channel),
        _ => None,
    };
    let want = |s: Suite| args.which == Suite::All || args.which == s;
    let mut suites = Vec::new();
    if want(Suite::Pinching) {
        suites.push(verify::pinching(args.trials, args.seed)?);
    }
    if want(Suite::Dataprocessing) {
        suites.push(verify::data_processing(
            args.trials,
            args.seed,
            extra.as_ref(),
        )?);
    }
    if want(Suite::Fm) {
        suites.push(verify::fourier_motzkin(
            args.trials.div_ceil(4).max(1),
            args.seed,
        ));
    }
    if want(Suite::Reduction) {
        suites.push(verify::reduction(args.trials, args.seed)?);
    }
    let ok = suites.iter().all(|s| s.pass());
    Ok(commands::Outcome {
        result: json!({ "suites": to_value(&suites) }),
        verdict: Some(Verdict::from_bool(ok)),
        csv: None,
    })
}

fn csv_path(explicit: Option<&Path>, out: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| out.map(|o| o.with_extension("csv")))
}

fn run(cli: Cli) -> Result<Option<Verdict>, CliError> {
    let start = Instant::now();
    let (name, common, args, spec, outcome, csv_target) = match &cli.command {
        Command::Divergence(a) => {
            let spec = require_spec(&a.common)?;
            let o = commands::divergence(&spec, &a.rho, &a.sigma, a.measure, a.order)?;
            ("divergence", &a.common, to_value(a), Some(spec), o, None)
        }
        Command::Bound(a) => {
            let spec = require_spec(&a.common)?;
            let o = commands::bound(&spec, a.which, a.alpha, a.optimize, a.stealth)?;
            ("bound", &a.common, to_value(a), Some(spec), o, None)
        }
        Command::Region(a) => {
            let spec = require_spec(&a.common)?;
            let o = commands::region(&spec, a.which, a.stealth, a.optimize, a.seed, a.sweep)?;
            let target = csv_path(a.csv.as_deref(), a.common.out.as_deref());
            ("region", &a.common, to_value(a), Some(spec), o, target)
        }
        Command::Simulate(a) => {
            let spec = require_spec(&a.common)?;
            let o = commands::simulate(&spec, a.which, a.trials, a.seed, a.cap, a.alpha)?;
            ("simulate", &a.common, to_value(a), Some(spec), o, None)
        }
        Command::Verify(a) => {
            let spec = a.common.spec.as_deref().map(load_spec).transpose()?;
            let o = run_verify(a, spec.as_ref())?;
            ("verify", &a.common, to_value(a), spec, o, None)
        }
    };
    if let (Some(path), Some(rows)) = (&csv_target, &outcome.csv) {
        write_atomic(path, &boundary_csv(rows)?)?;
    }
    let report = RunReport {
        tool: "covert".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name.into(),
        config: json!({ "args": args, "spec": spec.as_ref().map(to_value) }),
        result: outcome.result,
        verdict: outcome.verdict,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    emit(&report, common.out.as_deref())?;
    Ok(report.verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Some(Verdict::Fail)) => {
            eprintln!("error: property check failed; see the report");
            ExitCode::from(Code::Property as u8)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
