//! `khess`: command-line driver for radial k-Hessian experiments.
//!
//! Every subcommand prints one JSON object on stdout (except `exponents
//! --format text`) and writes its data artifacts as CSV or JSON. Failures print
//! a one-line JSON record on stderr and exit with 1 (domain or config), 2
//! (numeric), 64 (usage), 66 (unreadable input) or 73 (artifact not writable).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::{CliError, EXIT_USAGE};
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "khess", version, about = "Radial k-Hessian equations and their Lotka-Volterra reduction")]
pub struct Cli {
    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Config file plus the parameters that override it.
#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Artifact format, overriding `output.format`.
    #[arg(long, value_enum)]
    pub data_format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Critical exponents, δ and the stationary points at l0 and l_inf.
    Exponents {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        l0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        linf: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: TextFormat,
    },
    /// Sampled check of the weight assumptions.
    CheckWeight {
        #[command(flatten)]
        common: Common,
    },
    /// Regular radial solution with w(0) = w0.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        w0: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a profile CSV (r,w,wprime) into an orbit CSV (t,x,y).
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        from_profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular solution normalized by w(1) = -1; prints λ̃.
    Singular {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the regular solution with w(0) = w0.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        w0: f64,
        /// Last orbit time (ln r); default: the end of `integrator.t_span` if set, else 20.
        #[arg(long)]
        t_end: Option<f64>,
        /// Write the classified orbit samples.
        #[arg(long)]
        emit_orbit: Option<PathBuf>,
    },
    /// λ(a) on a log grid of a in [amin, amax].
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of regular solutions with λ(a) = lambda.
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        /// Read the curve (a,lambda) instead of sweeping.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Zeros of w̃ - w(·, a) on an interval, at λ = λ̃.
    Intersections {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: f64,
        /// `lo,hi`
        #[arg(long, value_parser = parse_interval)]
        interval: (f64, f64),
    },
    /// Monotone iteration for the maximal solution on the unit ball.
    Maximal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bracket for the extremal parameter λ*.
    LambdaStar {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Grid {
    #[arg(long, default_value_t = 1.0)]
    pub amin: f64,
    #[arg(long, default_value_t = 1e4)]
    pub amax: f64,
    #[arg(long, default_value_t = 161)]
    pub count: usize,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower end {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper end {hi:?}"))?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(format!("need 0 <= lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

impl Common {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.n.is_some() {
            cfg.params.n = self.n;
        }
        if self.k.is_some() {
            cfg.params.k = self.k;
        }
        if self.q.is_some() {
            cfg.params.q = self.q;
        }
        if self.data_format.is_some() {
            cfg.output.format = self.data_format;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => {
                    let msg = e.kind().as_str().unwrap_or("invalid arguments");
                    eprintln!("{}", CliError::Usage(msg.to_string()).report());
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
