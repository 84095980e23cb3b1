//! Command-line front end. Exit codes: 0 success, 1 config error, 2 IO error.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::harness::{
    run_paired_experiments, run_single_arm, ExperimentConfig, GoldenOutcome, HarnessError, Mode,
    OutputFormat, ScenarioScript,
};
use crate::query;
use crate::store::KnowledgeStore;

#[derive(Parser)]
#[command(
    name = "crossvote",
    about = "Knowledge-backed traffic-light negotiation and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded experiments and emit a comparison report.
    Simulate {
        #[arg(long, default_value_t = 1)]
        experiments: u32,
        #[arg(long, default_value_t = 300)]
        vehicles: u32,
        #[arg(long, default_value_t = 50)]
        routes: u32,
        #[arg(long, default_value_t = 10)]
        intersections: u32,
        #[arg(long = "radius-m", default_value_t = 10_000.0)]
        radius_m: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Paired)]
        mode: Mode,
        /// Base phase duration in seconds.
        #[arg(long = "base-duration", default_value_t = 20)]
        base_duration: u32,
        /// Seconds of green added per queued vehicle.
        #[arg(long = "congestion-gain", default_value_t = 5.0)]
        congestion_gain: f64,
        #[arg(long = "phase-count", default_value_t = 2)]
        phase_count: u32,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Evaluate a conjunctive query against a knowledge-base file.
    Query {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: String,
    },
    /// Check every entity of a knowledge-base file against its schema.
    Validate {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Replay a scripted negotiation scenario.
    Replay {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    Ok(std::fs::read_to_string(path)?)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            experiments,
            vehicles,
            routes,
            intersections,
            radius_m,
            seed,
            mode,
            base_duration,
            congestion_gain,
            phase_count,
            out,
            format,
        } => {
            let config = ExperimentConfig {
                n_experiments: experiments,
                n_vehicles: vehicles,
                n_routes: routes,
                n_intersections: intersections,
                radius_m,
                seed,
                base_duration_s: base_duration,
                congestion_gain,
                phase_count,
                mode,
            };
            let rendered = match mode {
                Mode::Paired => run_paired_experiments(&config)?.render(format),
                Mode::Baseline | Mode::Negotiate => run_single_arm(&config)?.render(format),
            };
            match out {
                Some(path) => std::fs::write(path, rendered)?,
                None => print!("{rendered}"),
            }
            Ok(())
        }
        Command::Query { kb, query } => {
            let text = read_file(&kb)?;
            let store =
                KnowledgeStore::parse_text(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let patterns = query::compile(&query).map_err(|e| CliError::Config(e.to_string()))?;
            let bindings = store
                .match_patterns(&patterns)
                .map_err(|e| CliError::Config(e.to_string()))?;
            if bindings.is_empty() {
                println!("no results");
            }
            for binding in bindings {
                let row: Vec<String> = binding
                    .iter()
                    .map(|(var, value)| format!("?{var}={value}"))
                    .collect();
                println!("{}", row.join("\t"));
            }
            Ok(())
        }
        Command::Validate { kb } => {
            let text = read_file(&kb)?;
            let store =
                KnowledgeStore::parse_text(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let violations = store.validate_all();
            if violations.is_empty() {
                println!("ok: no violations");
            }
            for (entity, violation) in violations {
                println!("{entity}: {violation}");
            }
            Ok(())
        }
        Command::Replay { scenario } => {
            let script = ScenarioScript::load(&scenario).map_err(CliError::from)?;
            let outcome = crate::harness::golden::run_golden(&script).map_err(CliError::from)?;
            print_golden(&outcome);
            Ok(())
        }
    }
}

fn print_golden(outcome: &GoldenOutcome) {
    for (i, (winner, tally)) in outcome.winners.iter().zip(&outcome.tallies).enumerate() {
        let votes: Vec<String> = tally.iter().map(|(b, n)| format!("{b}:{n}")).collect();
        println!("int{}: winner {winner}  [{}]", i + 1, votes.join(", "));
    }
    println!(
        "car: travel {} s = {} s free flow + {} s waiting",
        outcome.car_travel_time_s, outcome.free_flow_time_s, outcome.car_wait_s
    );
    for (intersection, wait) in &outcome.car_waits_by_intersection {
        println!("car waited {wait} s at {intersection}");
    }
}
