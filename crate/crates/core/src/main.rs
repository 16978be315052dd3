use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use laufer::cli::{
    analyze, parse_points, parse_potential, parse_range, parse_slot, sweep, AnalyzeOptions,
    SweepAxis, SweepSpec,
};
use laufer::critical::{DEFAULT_STARTS, DEFAULT_TOL};
use laufer::selftest;
use laufer::Error;

const EXIT_OK: u8 = 0;
const EXIT_VERDICT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "laufer",
    version,
    about = "Normal-bundle splitting types from geometric potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one potential document.
    Analyze {
        file: PathBuf,
        /// JSON array of critical points to use instead of the solver.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_STARTS)]
        starts: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Analyze a grid of potentials varying one or two coefficients.
    Sweep {
        file: PathBuf,
        /// Slot to vary, as "d,k".
        #[arg(long)]
        vary: String,
        /// Values as "a:b:steps".
        #[arg(long)]
        range: String,
        #[arg(long, requires = "range2")]
        vary2: Option<String>,
        #[arg(long, requires = "vary2")]
        range2: Option<String>,
        #[arg(long, default_value_t = DEFAULT_STARTS)]
        starts: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the TSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact property checks on built-in random corpora.
    Selftest,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_)
            | Error::ModeMismatch { .. }
            | Error::DimensionMismatch { .. }
            | Error::NegativeOmegaExponent(_)
            | Error::NotNormalized { .. } => Failure::Input(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if path == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    fs::write(path, text)
        .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Analyze {
            file,
            points,
            starts,
            tol,
            seed,
            json,
        } => {
            let parsed = parse_potential(&read(&file)?)?;
            let points = match points {
                Some(path) => Some(parse_points(
                    &read(&path)?,
                    parsed.potential.mode(),
                    parsed.potential.n(),
                )?),
                None => None,
            };
            let opts = AnalyzeOptions {
                points,
                starts,
                tol,
                seed,
            };
            let mut report = analyze(&parsed.potential, &opts)?;
            report.warnings = parsed.warnings;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match json {
                Some(path) => {
                    write(&path, &(report.to_json() + "\n"))?;
                    if path != Path::new("-") {
                        print!("{}", report.to_table());
                    }
                }
                None => print!("{}", report.to_table()),
            }
            Ok(if report.exit_code() == 0 {
                EXIT_OK
            } else {
                EXIT_VERDICT
            })
        }
        Command::Sweep {
            file,
            vary,
            range,
            vary2,
            range2,
            starts,
            tol,
            seed,
            out,
        } => {
            let parsed = parse_potential(&read(&file)?)?;
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            let mode = parsed.potential.mode();
            let mut axes = Vec::new();
            let mut slots = vec![(vary, range)];
            if let (Some(v), Some(r)) = (vary2, range2) {
                slots.push((v, r));
            }
            for (slot, values) in slots {
                let (d, k) = parse_slot(&slot)?;
                axes.push(SweepAxis {
                    d,
                    k,
                    values: parse_range(&values, mode)?,
                });
            }
            let table = sweep(&SweepSpec {
                base: parsed.potential,
                axes,
                options: AnalyzeOptions {
                    points: None,
                    starts,
                    tol,
                    seed,
                },
            })?;
            let tsv = table.to_tsv();
            match out {
                Some(path) => write(&path, &tsv)?,
                None => print!("{tsv}"),
            }
            Ok(if table.all_agree() {
                EXIT_OK
            } else {
                EXIT_VERDICT
            })
        }
        Command::Selftest => {
            let outcomes = selftest::exact_suite();
            for o in &outcomes {
                println!("{}", o.line());
            }
            Ok(if outcomes.iter().all(|o| o.passed) {
                EXIT_OK
            } else {
                EXIT_VERDICT
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    let code = match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Input(msg))) => {
            eprintln!("input error: {msg}");
            EXIT_INPUT
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
        Err(_) => EXIT_INTERNAL,
    };
    ExitCode::from(code)
}
