//! `lpfr`: geodesics of the L^p-Fisher-Rao metric and of α-connections.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 solver failure,
//! 3 geodesic left the space (the partial path is still written).

mod commands;
mod figures;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lpfr",
    version,
    about = "L^p-Fisher-Rao and alpha-connection geodesics on densities"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Reproduce a figure preset (2: densities on [0,1], 3: normal family).
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    figure: Option<u8>,

    /// Output directory for `--figure`.
    #[arg(long, default_value = ".", requires = "figure")]
    out: PathBuf,

    #[command(subcommand)]
    command: Option<Command>,
}

/// Exactly one of `--p` and `--alpha`; `p = 2/(1 − α)`.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Exponent {
    /// Exponent p > 1.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// alpha in (-1, 1), equivalent to p = 2/(1 - alpha).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

impl Exponent {
    pub fn resolve(&self) -> Result<f64, CliError> {
        match (self.p, self.alpha) {
            (Some(p), None) => {
                lpfr_core::grid::alpha_from_p(p).map_err(CliError::from)?;
                Ok(p)
            }
            (None, Some(alpha)) => Ok(lpfr_core::grid::exponents_from_alpha(alpha)?.0),
            _ => Err(CliError::Usage("give exactly one of --p and --alpha".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of grid nodes on [0,1].
    #[arg(long, default_value_t = 100)]
    grid_n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form geodesic between two densities.
    DensGeodesic {
        #[command(flatten)]
        exponent: Exponent,
        #[command(flatten)]
        grid: GridArgs,
        /// Density file (column `f`) or `uniform`, `bump(m,s)`, `mixture(m1,s1,m2,s2,w)`.
        #[arg(long)]
        mu0: String,
        #[arg(long)]
        mu1: String,
        /// Number of time points.
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exponential map on densities; stops where positivity is lost.
    DensExp {
        #[command(flatten)]
        exponent: Exponent,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        mu0: String,
        /// Velocity file (column `a`) or `sin(k,amp)`, `cos(k,amp)`.
        #[arg(long)]
        velocity: String,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Geodesic distance between two densities.
    Distance {
        #[command(flatten)]
        exponent: Exponent,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        mu0: String,
        #[arg(long)]
        mu1: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// alpha-geodesic between probability densities (give --mu1 or --velocity).
    ProbAlphaGeodesic {
        #[command(flatten)]
        exponent: Exponent,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        mu0: String,
        #[arg(long, conflicts_with = "velocity", required_unless_present = "velocity")]
        mu1: Option<String>,
        #[arg(long)]
        velocity: Option<String>,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        /// End time for the initial-value problem.
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        /// Also write the time change as `t,tau,tau_dot`.
        #[arg(long)]
        tau_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// L^p-Fisher-Rao geodesic between probability densities by energy minimization.
    ProbLpGeodesic {
        #[command(flatten)]
        exponent: Exponent,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        mu0: String,
        #[arg(long)]
        mu1: String,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.1)]
        eta0: f64,
        /// Also write the energy trace as `iteration,energy`.
        #[arg(long)]
        energy_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Geodesic between two normal distributions in (m, sigma) coordinates.
    NormalGeodesic {
        #[command(flatten)]
        exponent: Exponent,
        /// `lp` for the Finsler metric, `alpha` for the alpha-connection.
        /// Defaults to the flag used to give the exponent.
        #[arg(long, value_enum)]
        connection: Option<Connection>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        theta0: [f64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        theta1: [f64; 2],
        /// Number of time steps.
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Gauss-Hermite node count.
        #[arg(long, default_value_t = 64)]
        quadrature: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare the tensor formulas with finite differences of F_p^2.
    CheckTensors {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Connection {
    Lp,
    Alpha,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.trim().parse().map_err(|_| format!("`{a}` is not a number"))?,
            b.trim().parse().map_err(|_| format!("`{b}` is not a number"))?,
        ]),
        _ => Err(format!("expected `m,sigma`, got `{s}`")),
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(String),
    /// The computed path is written before this is raised.
    LeftSpace(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Solver(_) => 2,
            CliError::LeftSpace(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::LeftSpace(m) => write!(f, "geodesic left the space: {m}"),
        }
    }
}

impl From<lpfr_core::Error> for CliError {
    fn from(e: lpfr_core::Error) -> Self {
        use lpfr_core::Error as E;
        match e {
            E::ShootingFailed(_) | E::DegenerateDenominator(_) | E::NonPositiveSigma(_) => {
                CliError::Solver(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match (cli.figure, cli.command) {
        (Some(2), None) => figures::figure2(&cli.out),
        (Some(3), None) => figures::figure3(&cli.out),
        (None, Some(cmd)) => commands::run(cmd),
        _ => Err(CliError::Usage("give a subcommand or --figure 2|3".into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
