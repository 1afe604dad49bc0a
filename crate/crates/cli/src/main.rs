use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgvertex::scattering::momentum_grid;
use qgvertex::{Error, Tolerance};
use serde_json::Value;

mod commands;
mod input;

use commands::DesignType;
use input::RawCoupling;

/// Analyze quantum-graph vertex couplings with at most two eigenvalues.
#[derive(Debug, Parser)]
#[command(name = "qgvertex", version)]
struct Cli {
    /// Numerical tolerance for structural checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.01)]
    k_min: f64,
    #[arg(long, default_value_t = 100.0)]
    k_max: f64,
    #[arg(long, default_value_t = 61)]
    points: usize,
    /// Linear instead of logarithmic spacing.
    #[arg(long)]
    linear: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a coupling. Phases within 1e-9 of 0 or pi are snapped
    /// before typing, so borderline couplings get the snapped type.
    Classify { input: PathBuf },
    /// Reflection and transmission probabilities over a momentum grid (CSV).
    Scatter {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Closed-form and sampled reflection/transmission ratio (CSV).
    Rho {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Design an equally-transmitting coupling with a given factor c.
    Design {
        #[arg(long = "type", value_enum)]
        kind: DesignType,
        /// Vertex degree, used with the standard M.
        #[arg(long, required_unless_present = "m_file")]
        n: Option<usize>,
        #[arg(long)]
        c: f64,
        #[arg(long, allow_negative_numbers = true, conflicts_with = "tan_xi")]
        xi: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        tan_xi: Option<f64>,
        /// Branch sign for types II and III.
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        sign: f64,
        /// Use −(−I + 2J/n) instead of −I + 2J/n as the standard M.
        #[arg(long)]
        negate_m: bool,
        /// Read M from a JSON file with fields n and M.
        #[arg(long, conflicts_with_all = ["n", "negate_m"])]
        m_file: Option<PathBuf>,
    },
    /// Exhaustive search for real MPS Hermitian unitary matrices (n <= 6).
    SearchMps {
        #[arg(long)]
        n: usize,
    },
    /// Run all invariant checks on a coupling.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

/// Why a command stopped, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Domain { code: u8, message: String, report: Value },
    Internal(String),
}

impl Failure {
    pub fn parse(message: String) -> Self {
        Failure::Parse(message)
    }

    pub fn domain(code: u8, message: String, report: Value) -> Self {
        Failure::Domain { code, message, report }
    }

    pub fn internal(message: String) -> Self {
        Failure::Internal(message)
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Parse(m) | Failure::Internal(m) => m.clone(),
            Failure::Domain { message, .. } => message.clone(),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Domain { code, .. } => *code,
            Failure::Internal(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        match err {
            Error::NotUnitary { deviation } => Failure::domain(
                3,
                message,
                serde_json::json!({ "error": "NotUnitary", "deviation": deviation }),
            ),
            Error::NotHermitianUnitary | Error::NotUnitaryPs { .. } => {
                Failure::domain(3, message, serde_json::json!({ "error": "NotUnitary" }))
            }
            Error::MoreThanTwoEigenvalues { residual } => Failure::domain(
                4,
                message,
                serde_json::json!({ "class": "OutsideFamily", "residual": residual }),
            ),
            Error::InvalidOrder(_)
            | Error::BadShape { .. }
            | Error::NonFinite { .. }
            | Error::InvalidTolerance(_)
            | Error::InvalidMomentum(_)
            | Error::InvalidGrid(_)
            | Error::InvalidXi(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. } => Failure::Parse(message),
            _ => Failure::Internal(message),
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<RawCoupling, Failure> {
    input::parse_coupling(&input::read_text(path)?)
}

fn grid(args: &GridArgs) -> Result<Vec<f64>, Failure> {
    Ok(momentum_grid(args.k_min, args.k_max, args.points, !args.linear)?)
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let tol = Tolerance::new(cli.tol)?;
    let text = match &cli.command {
        Command::Classify { input } => commands::cmd_classify(&load(input)?, tol)?,
        Command::Scatter { input, grid: g } => commands::cmd_scatter(&load(input)?, &grid(g)?, tol)?,
        Command::Rho { input, grid: g } => commands::cmd_rho(&load(input)?, &grid(g)?, tol)?,
        Command::Design {
            kind,
            n,
            c,
            xi,
            tan_xi,
            sign,
            negate_m,
            m_file,
        } => {
            let m = match (m_file, n) {
                (Some(path), _) => input::parse_m_file(&input::read_text(path)?)?,
                (None, Some(n)) => commands::standard_source(*n, *negate_m)?,
                (None, None) => return Err(Failure::parse("design needs --n or --m-file".into())),
            };
            let xi = xi.or(tan_xi.map(f64::atan));
            let req = commands::DesignRequest {
                kind: *kind,
                m,
                c: *c,
                xi,
                sign: *sign,
            };
            commands::cmd_design(&req, tol)?
        }
        Command::SearchMps { n } => commands::cmd_search_mps(*n, tol)?,
        Command::Verify { input, grid: g } => {
            let (text, pass) = commands::cmd_verify(&load(input)?, &grid(g)?, tol);
            emit(&cli.output, &text)?;
            return Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    };
    emit(&cli.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            if let Failure::Domain { report, .. } = &failure {
                print!("{}", commands::to_json(report));
            }
            ExitCode::from(failure.code())
        }
    }
}
