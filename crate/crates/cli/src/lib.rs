//! `pam`: enumeration, verification and bound tables on top of `pam-core`.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or config error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod criteria;
pub mod output;

use config::{parse_measure, Format, RunConfig};

/// Directory for outputs; relative `--output` paths are placed inside it.
pub const OUTPUT_DIR_ENV: &str = "PAM_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Failed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pam", version, about = "Moment bounds for the parabolic Anderson model with rough noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the exponent vectors of A_n with their lattice paths.
    Paths {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Check the product expansion identity in exact rationals on random inputs.
    Identity {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// gamma_n over A_n for n up to n-max on a parameter grid.
    GammaScan {
        #[arg(long)]
        n_max: Option<usize>,
        /// Grid side; the admissible region is sampled grid x grid.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Closed form of the ordered-simplex integral, optionally against quadrature.
    Dirichlet {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Heat-semigroup evolution J0(t, x) of an initial measure.
    J0 {
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Moment series and fitted envelope over a (p, t) grid.
    BoundTable {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        /// Per-chaos constant C of the asymptotic bound.
        #[arg(long = "C", alias = "c")]
        c: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Monte Carlo chaos norms against the assembled bound, plus the psi(t,t) comparison.
    McVerify {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run every acceptance check and print one line per criterion.
    Selfcheck {
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long = "H0")]
    pub h0: Option<f64>,
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Constant of the Hardy-Littlewood-Sobolev step (default 1).
    #[arg(long = "b_H0", alias = "b-h0")]
    pub b_h0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// dirac:X0 | lebesgue:C | gaussian:MEAN,VAR | quadratic | JSON object
    #[arg(long, value_parser = parse_measure, allow_hyphen_values = true)]
    pub measure: Option<pam_core::Measure>,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// JSON config; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl IoArgs {
    fn base(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig { format: self.format, output: self.output.clone(), ..Default::default() }))
    }
}

impl ParamArgs {
    fn config(&self) -> RunConfig {
        RunConfig { h0: self.h0, h: self.h, b_h0: self.b_h0, ..Default::default() }
    }
}

/// Config file overlaid with the flags, and the subcommand name.
pub fn resolve(command: &Command) -> Result<(&'static str, RunConfig), CliError> {
    Ok(match command {
        Command::Paths { n, io } => ("paths", io.base()?.overlay(RunConfig { n: *n, ..Default::default() })),
        Command::Identity { n, count, seed, io } => (
            "identity",
            io.base()?.overlay(RunConfig { n: *n, count: *count, seed: *seed, ..Default::default() }),
        ),
        Command::GammaScan { n_max, grid, params, io } => (
            "gamma-scan",
            io.base()?.overlay(params.config()).overlay(RunConfig { n_max: *n_max, grid: *grid, ..Default::default() }),
        ),
        Command::Dirichlet { t, alphas, betas, oracle, io } => (
            "dirichlet",
            io.base()?.overlay(RunConfig {
                t: t.map(|v| vec![v]),
                alphas: alphas.clone(),
                betas: betas.clone(),
                oracle: oracle.then_some(true),
                ..Default::default()
            }),
        ),
        Command::J0 { t, x, measure, io } => (
            "j0",
            io.base()?.overlay(RunConfig { t: t.clone(), x: *x, measure: measure.measure.clone(), ..Default::default() }),
        ),
        Command::BoundTable { p, t, x, c, params, measure, io } => (
            "bound-table",
            io.base()?.overlay(params.config()).overlay(RunConfig {
                p: p.clone(),
                t: t.clone(),
                x: *x,
                c: *c,
                measure: measure.measure.clone(),
                ..Default::default()
            }),
        ),
        Command::McVerify { n, t, x, samples, seed, workers, params, measure, io } => (
            "mc-verify",
            io.base()?.overlay(params.config()).overlay(RunConfig {
                n: *n,
                t: t.clone(),
                x: *x,
                samples: *samples,
                seed: *seed,
                workers: *workers,
                measure: measure.measure.clone(),
                ..Default::default()
            }),
        ),
        Command::Selfcheck { workers, io } => {
            ("selfcheck", io.base()?.overlay(RunConfig { workers: *workers, ..Default::default() }))
        }
    })
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "pam: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    let (name, cfg) = resolve(command)?;
    let mut sink = output::Sink::open(name, &cfg)?;
    let result = commands::dispatch(name, &cfg, &mut sink);
    sink.finish()?;
    result
}
