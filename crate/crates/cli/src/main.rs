//! Command-line driver: builds a scenario from a config file plus flags,
//! runs it, writes the report and exits with its verdict code.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phaseforge::report::{diff_reports, emit_report, run_scenario, Command, Report, ScenarioConfig};
use phaseforge::Error;

/// Exit code for unusable configuration or arguments.
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "phaseforge", version, about = "Exact phase calculus over finite rings")]
struct Cli {
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Ring tables, radical and basic invariants.
    Ring {
        #[command(subcommand)]
        action: RingAction,
    },
    /// Search for a generating additive character.
    Frobenius(Scenario),
    /// Single-phase calculus.
    Phase {
        #[command(subcommand)]
        action: PhaseAction,
    },
    /// Phase extraction from a datum.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Report utilities.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
    /// The fixed verification battery.
    Suite(Scenario),
}

#[derive(Subcommand)]
enum RingAction {
    Info(Scenario),
}

#[derive(Subcommand)]
enum PhaseAction {
    /// Degrees, defect tensor and polarization of one phase.
    Analyze(Scenario),
    /// Iterated differences by both methods.
    Derive(Scenario),
}

#[derive(Subcommand)]
enum ModelAction {
    Extract(Scenario),
    Verify(Scenario),
    Boundary(Scenario),
    Compare(Scenario),
}

#[derive(Subcommand)]
enum ReportAction {
    /// Differences between the stable sections of two JSON reports.
    Diff { a: PathBuf, b: PathBuf },
}

/// Scenario flags; each overrides the matching config-file key.
#[derive(Args, Default)]
struct Scenario {
    /// Flat `key = value` scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ring: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// `degN`, `poly:p1;p2` or `explicit:K`.
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated strategy names.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    cap: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    weak: bool,
    /// `label:poly;...` extra phases.
    #[arg(long)]
    extra: Option<String>,
    /// Phase table file.
    #[arg(long = "in")]
    input: Option<String>,
    /// Comma-separated packed increments.
    #[arg(long)]
    increments: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `json` or `text`.
    #[arg(long)]
    format: Option<String>,
}

impl Scenario {
    fn build(&self, command: Command) -> Result<ScenarioConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                ScenarioConfig::parse(&text)?
            }
            None => ScenarioConfig::default(),
        };
        cfg.command = command;
        let flags = [
            ("ring", &self.ring),
            ("n", &self.n),
            ("family", &self.family),
            ("strategy", &self.strategy),
            ("cap", &self.cap),
            ("workers", &self.workers),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("extra", &self.extra),
            ("input", &self.input),
            ("increments", &self.increments),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.weak {
            cfg.weak = true;
        }
        Ok(cfg)
    }
}

fn run(command: Command, flags: &Scenario) -> ExitCode {
    let cfg = match flags.build(command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_capacity() { EXIT_CAPACITY } else { EXIT_USAGE });
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = emit_report(&report, cfg.format, path) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{}", report.to_text());
        }
        None => print!("{}", report.render(cfg.format)),
    }
    ExitCode::from(report.exit_code() as u8)
}

fn diff(a: &PathBuf, b: &PathBuf) -> ExitCode {
    let load = |p: &PathBuf| -> Result<Report, Error> {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })?;
        Report::from_json(&text)
    };
    match (load(a), load(b)) {
        (Ok(ra), Ok(rb)) => {
            let lines = diff_reports(&ra, &rb);
            if lines.is_empty() {
                println!("stable sections identical");
                ExitCode::SUCCESS
            } else {
                for l in &lines {
                    println!("{l}");
                }
                ExitCode::from(1)
            }
        }
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    match &cli.command {
        Top::Ring { action: RingAction::Info(s) } => run(Command::RingInfo, s),
        Top::Frobenius(s) => run(Command::Frobenius, s),
        Top::Phase { action } => match action {
            PhaseAction::Analyze(s) => run(Command::PhaseAnalyze, s),
            PhaseAction::Derive(s) => run(Command::PhaseDerive, s),
        },
        Top::Model { action } => match action {
            ModelAction::Extract(s) => run(Command::ModelExtract, s),
            ModelAction::Verify(s) => run(Command::ModelVerify, s),
            ModelAction::Boundary(s) => run(Command::ModelBoundary, s),
            ModelAction::Compare(s) => run(Command::ModelCompare, s),
        },
        Top::Report { action: ReportAction::Diff { a, b } } => diff(a, b),
        Top::Suite(s) => run(Command::Suite, s),
    }
}
