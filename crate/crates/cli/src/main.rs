use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sphereum::GridSpec64;

mod commands;
mod format;
mod reproduce;
mod state_file;

use state_file::StateSpec;

pub const EXIT_ROWS_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_WRITE: u8 = 4;

/// Environment variable holding default quadrature node counts, `N` or `NTxNP`.
pub const GRID_ENV: &str = "SPHEREUM_DEFAULT_GRID";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn write(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_WRITE,
            message: format!("cannot write {}: {err}", path.display()),
        }
    }
}

impl From<sphereum::Error> for CliError {
    fn from(e: sphereum::Error) -> Self {
        use sphereum::Error::*;
        let code = match e {
            InvalidGrid(_) | Domain(_) | InvalidParameter(_) | TruncationInsufficient { .. } => {
                EXIT_INPUT
            }
            _ => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sphereum",
    version,
    about = "Uncertainty measures for states on the circle and the sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Gauss-Legendre nodes in theta at the base level.
    #[arg(long)]
    grid_ntheta: Option<usize>,
    /// Gauss-Legendre nodes per 2pi window in phi at the base level.
    #[arg(long)]
    grid_nphi: Option<usize>,
    /// Relative tolerance between refinement levels.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Position and momentum measures with packet centers, as JSON.
    Measure {
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gram-Robertson report for a list of operators, as JSON.
    Ur {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated labels from phi, theta, p_phi, p_theta_n<k>.
        #[arg(long, value_delimiter = ',', required = true)]
        ops: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density samples for plotting, as CSV.
    Grid {
        #[arg(long)]
        state: PathBuf,
        /// Plot rows in theta.
        #[arg(long, default_value_t = 90)]
        grid_ntheta: usize,
        /// Plot columns in phi.
        #[arg(long, default_value_t = 180)]
        grid_nphi: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares every published value with the computed one; writes
    /// reproduce.csv and reproduce.json into --out.
    Reproduce {
        /// Relative tolerance for published values given to 2-3 digits.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Default node counts from the environment, falling back to the library
/// defaults.
fn default_grid() -> Result<GridSpec64, CliError> {
    let mut spec = GridSpec64::default();
    if let Ok(raw) = std::env::var(GRID_ENV) {
        let bad = || CliError::input(format!("{GRID_ENV} must be N or NTxNP, got '{raw}'"));
        let parts: Vec<&str> = raw.trim().split(['x', 'X']).collect();
        let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        let (nt, np) = match parts.as_slice() {
            [n] => (parse(n)?, parse(n)?),
            [a, b] => (parse(a)?, parse(b)?),
            _ => return Err(bad()),
        };
        spec.n_theta = nt;
        spec.n_phi = np;
    }
    Ok(spec)
}

fn grid_spec(args: &GridArgs) -> Result<GridSpec64, CliError> {
    let base = default_grid()?;
    let spec = GridSpec64::new(
        args.grid_ntheta.unwrap_or(base.n_theta),
        args.grid_nphi.unwrap_or(base.n_phi),
        base.max_refinements,
        args.tol.unwrap_or(base.rel_tol),
    )?;
    Ok(spec)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::write(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::write(Path::new("<stdout>"), e))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Measure { state, grid, out } => {
            let spec = grid_spec(&grid)?;
            let report = commands::measure(&StateSpec::read(&state)?, &spec)?;
            emit(&pretty(&report), out.as_deref())?;
        }
        Command::Ur {
            state,
            ops,
            grid,
            out,
        } => {
            let spec = grid_spec(&grid)?;
            let state = StateSpec::read(&state)?;
            let ops = ops
                .iter()
                .map(|l| commands::parse_operator(l))
                .collect::<Result<Vec<_>, _>>()?;
            let report = commands::ur(&state, &ops, &spec)?;
            emit(&pretty(&report), out.as_deref())?;
        }
        Command::Grid {
            state,
            grid_ntheta,
            grid_nphi,
            out,
        } => {
            let spec = default_grid()?;
            let csv = commands::grid_csv(&StateSpec::read(&state)?, grid_ntheta, grid_nphi, &spec)?;
            emit(&csv, out.as_deref())?;
        }
        Command::Reproduce { tol, out } => {
            if tol.is_nan() || tol <= 0.0 {
                return Err(CliError::input(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
            let spec = default_grid()?;
            let rows = reproduce::rows(tol, &spec);
            let failed = rows.iter().filter(|r| !r.pass).count();
            let report = json!({
                "tolerance": tol,
                "rows": rows,
                "failed": failed,
                "total": rows.len(),
            });
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| CliError::write(&dir, e))?;
                    emit(&reproduce::to_csv(&rows), Some(&dir.join("reproduce.csv")))?;
                    emit(&pretty(&report), Some(&dir.join("reproduce.json")))?;
                    let mut summary = String::new();
                    for r in rows.iter().filter(|r| !r.pass) {
                        summary.push_str(&format!(
                            "FAIL {}: {} (reference {})\n",
                            r.name, r.computed, r.reference
                        ));
                    }
                    summary.push_str(&format!(
                        "{} of {} rows passed\n",
                        rows.len() - failed,
                        rows.len()
                    ));
                    emit(&summary, None)?;
                }
                None => emit(&pretty(&report), None)?,
            }
            if failed > 0 {
                return Ok(EXIT_ROWS_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
