//! Command-line front end for `chordlab`.
//!
//! Every command renders one report, as canonical JSON or as CSV with a
//! fixed header, to stdout or to `--output`. Exit codes: 0 success, 1 a
//! failure inside the verified regime (an inequality with `|p| ≤ 2`, or a
//! suite check), 2 usage or input error, 3 numerical-assumption error.

pub mod commands;
pub mod verify;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{run_check, CheckRequest};
pub use verify::{run_verify, SuiteSummary};

/// Master seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_160_229;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CHORDLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "chordlab",
    version,
    about = "Point interactions and chord inequalities on closed loops"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Coulomb,
    Fm,
    Groundstate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Block,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenType {
    Regular,
    Rhomboid,
    Random,
    Admissible,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground state of the point-interaction Hamiltonian on a loop.
    Spectrum {
        /// Loop spec: a file path or inline JSON.
        #[arg(long = "loop")]
        loop_spec: String,
        #[arg(long)]
        alpha: f64,
        /// Kernel dimension (2 or 3); defaults to the loop's dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Bead count for smooth loops.
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Constrained optimization of a necklace.
    Optimize {
        #[arg(value_enum)]
        target: Target,
        #[arg(long = "N")]
        n: usize,
        /// Length budget; defaults to N.
        #[arg(long = "L")]
        length: Option<f64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Mean-chord inequalities on a loop.
    Check {
        #[arg(long = "loop")]
        loop_spec: String,
        /// Exponents; negative values select the D^{-|p|} family.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "2"
        )]
        p: Vec<f64>,
        /// Every m in 1..=N/2.
        #[arg(long)]
        all_m: bool,
        #[arg(long, conflicts_with = "all_m")]
        m: Option<usize>,
        /// Bead count for smooth loops.
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Norm of the residue-class operator against its closed-form bound.
    Opnorm {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Mode::Block)]
        mode: Mode,
        #[arg(long, default_value_t = chordlab::fourier_op::DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// Seeded property suite over every module.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Emit a loop spec.
    Gen {
        #[arg(long = "type", value_enum)]
        kind: GenType,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "L")]
        length: Option<f64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long = "M", default_value_t = 8)]
        modes: usize,
        #[arg(long, default_value_t = 3.0)]
        decay: f64,
        /// Longest step as a fraction of L/N (admissible configurations).
        #[arg(long, default_value_t = 0.9)]
        fill: f64,
    },
}

/// A rendered report and whether it records a verified-regime failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub regime_failure: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        let numerical = error
            .chain()
            .filter_map(|e| e.downcast_ref::<chordlab::Error>())
            .any(chordlab::Error::is_numerical);
        Self {
            code: if numerical { 3 } else { 2 },
            error,
        }
    }
}

impl From<chordlab::Error> for CliError {
    fn from(e: chordlab::Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

/// Reads a loop spec given inline or as a path.
pub fn read_loop_spec(arg: &str) -> anyhow::Result<chordlab::loopspec::LoopSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading loop spec {arg}"))?
    };
    Ok(chordlab::loopspec::parse_loop_spec(&text)?)
}

/// Writes `text` to `path`, or to stdout.
pub fn emit_report(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).with_context(|| format!("writing report to {}", p.display()))
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .context("writing report to stdout")?;
            out.flush().context("writing report to stdout")
        }
    }
}

/// Caps the global thread pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
        if n == 0 {
            anyhow::bail!("{THREADS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

/// Runs one parsed command line and returns its rendered report.
pub fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    commands::dispatch(&cli.command, cli.format)
}

/// Full driver: execute, write, and map the outcome to an exit code.
pub fn run(cli: &Cli) -> u8 {
    let rendered = match execute(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code;
        }
    };
    if let Err(e) = emit_report(&rendered.text, cli.output.as_deref()) {
        eprintln!("error: {e:#}");
        return 2;
    }
    u8::from(rendered.regime_failure)
}
