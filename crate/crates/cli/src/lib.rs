//! The `dynpair` command line: argument definitions, dispatch and exit codes.
//!
//! Map specs are either a family, `family:squaring`, `family:coc alpha=p/q`,
//! `family:quad c=p/q` or `family:lattes a=<int> b=<int>`, or explicit
//! ascending coefficient lists `num=[c0,c1,...] den=[c0,...]` with rational
//! entries (`den` defaults to `[1]`). A spec may be one quoted argument or
//! several words after the flag. Points are `p/q`, an integer, or `inf`.
//!
//! Output is one JSON object per line with sorted keys, or an aligned table
//! with `--format table`. Exit codes: 0 success, 1 verification failure,
//! 2 usage or parse error, 3 numeric non-convergence.

pub mod commands;
pub mod config;
pub mod output;
pub mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigFile, RunConfig, DEGREE_CAP_ENV};
use crate::output::{render, Record};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, specs or parameters.
    Usage(String),
    /// A computation that did not converge or certify.
    Numeric(dynpair::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dynpair::Error> for CliError {
    fn from(e: dynpair::Error) -> Self {
        use dynpair::Error::*;
        match e {
            DegreeTooSmall(_) | DegenerateLift | InvalidParameter(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e),
        }
    }
}

impl From<spec::ParseError> for CliError {
    fn from(e: spec::ParseError) -> Self {
        CliError::Usage(e.0)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dynpair",
    version,
    about = "Canonical heights and the Arakelov-Zhang pairing on P^1 over Q"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file with any of: tol, format, seed, degree_cap, n_max, k,
    /// stability_tol, target_radius.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Absolute tolerance for heights and quadrature.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// json or table.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest iterate degree; defaults to $DYNPAIR_DEGREE_CAP, then 5000.
    #[arg(long, global = true)]
    pub degree_cap: Option<u64>,
    /// Relative inclusion radius the root finder aims for.
    #[arg(long, global = true)]
    pub target_radius: Option<f64>,
    /// Progress and timings on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical height of a rational point.
    Height {
        #[arg(long, num_args = 1.., required = true)]
        map: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Cap on orbit steps.
        #[arg(long, default_value_t = dynpair::heights::DEFAULT_HEIGHT_ITERATIONS)]
        max_iterations: usize,
    },
    /// Periodic-point estimate of the pairing along a schedule.
    Pairing {
        #[arg(long, num_args = 1.., required = true)]
        phi: Vec<String>,
        #[arg(long, num_args = 1.., required = true)]
        psi: Vec<String>,
        /// `a..b` or `n`; defaults to `1..n_max`.
        #[arg(long)]
        n: Option<String>,
        /// `n` or a fixed integer.
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        stability_tol: Option<f64>,
        /// Also estimate the swapped order at the last schedule entry.
        #[arg(long)]
        symmetry: bool,
    },
    /// Closed forms and quadratures for the map families.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Logarithmic Mahler measure of a polynomial.
    Mahler {
        /// Ascending rational coefficients, e.g. `[1,-1/2,3]`.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum FamilyCommand {
    /// Pairing of x^2 with 1 - (1 - x)^2 conjugated by x -> alpha - x.
    Coc {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Bounds for the pairing of x^2 with x^2 + c, and the estimate.
    Quad {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// Truncation allowance when comparing the estimate to the bounds.
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
    },
    /// Pairing of x^2 with the Lattes map of y^2 = x(x - a)(x + b).
    Lattes {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        /// Also run the periodic-point estimator.
        #[arg(long)]
        estimate: bool,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 4)]
        k: u32,
    },
    /// The constant I(1).
    Smyth,
    /// The correction term I(t).
    I {
        #[arg(long)]
        t: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// The height-difference bound against h_st on sampled points.
    HeightDiff {
        #[arg(long, num_args = 1.., required = true)]
        psi: Vec<String>,
        /// Pairing with x^2; estimated when absent.
        #[arg(long, allow_hyphen_values = true)]
        pairing: Option<f64>,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 10.0)]
        max_height: f64,
        /// Print every case.
        #[arg(long)]
        cases: bool,
    },
    /// The family height inequalities.
    Families {
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        cases: bool,
    },
    /// The point where the height-difference bound is off by the pairing.
    Sharpness {
        #[arg(long)]
        cases: bool,
    },
    /// Vanishing pairing against preperiodicity of periodic points.
    Equivalence {
        #[arg(long, num_args = 1.., required = true)]
        phi: Vec<String>,
        #[arg(long, num_args = 1.., required = true)]
        psi: Vec<String>,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
        #[arg(long)]
        cases: bool,
    },
}

/// Records produced by a command and whether its checks held.
pub struct Outcome {
    pub records: Vec<Record>,
    pub ok: bool,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.global.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let g = &cli.global;
    let mut flags = ConfigFile {
        tol: g.tol,
        format: g.format.clone(),
        seed: g.seed,
        degree_cap: g.degree_cap,
        target_radius: g.target_radius,
        ..Default::default()
    };
    if let Command::Pairing {
        k,
        n_max,
        stability_tol,
        ..
    } = &cli.command
    {
        flags.k = k.clone();
        flags.n_max = *n_max;
        flags.stability_tol = *stability_tol;
    }
    let env = std::env::var(DEGREE_CAP_ENV).ok();
    RunConfig::resolve(&file, &flags, env.as_deref())
}

/// Runs a parsed command line, returning stdout text and the exit code.
pub fn execute(cli: &Cli) -> (String, i32) {
    let run = || -> Result<(Outcome, RunConfig), CliError> {
        let cfg = resolve_config(cli)?;
        let out = commands::dispatch(&cli.command, &cfg, cli.global.verbose)?;
        Ok((out, cfg))
    };
    match run() {
        Ok((out, cfg)) => {
            let code = if out.ok { EXIT_OK } else { EXIT_VERIFICATION };
            (render(&out.records, cfg.format), code)
        }
        Err(e) => {
            eprintln!("dynpair: {e}");
            (String::new(), e.exit_code())
        }
    }
}
