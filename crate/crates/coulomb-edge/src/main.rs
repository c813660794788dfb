//! Command-line front end: reproducible CSV/JSON studies of exact Coulomb
//! gas densities, edge corrections, and fluctuation expectations.
//!
//! Exit codes: 0 on success, 1 when a study's check fails (a decay flag is
//! false or an oracle comparison misses its tolerance), 2 on configuration
//! errors, 3 on numeric failures.

// The `!(x > 0.0)` guard style rejects NaN where `x <= 0.0` would let it
// through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::CommandOutput;
use crate::output::Table;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(msg) | Self::Numeric(msg) => msg,
        }
    }
}

impl From<coulomb_core::Error> for CliError {
    fn from(err: coulomb_core::Error) -> Self {
        match err {
            coulomb_core::Error::Numeric(_) => Self::Numeric(err.to_string()),
            _ => Self::Config(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "coulomb-edge",
    version,
    about = "Exact Coulomb-gas densities, edge corrections, and fluctuation studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial density profile R_n with a mass check
    Density(CommonArgs),
    /// Edge residual study across n with a decay verdict
    EdgeCheck(CommonArgs),
    /// Fluctuation expectations against the limiting functional
    FluctCheck(CommonArgs),
    /// Distance of D_n(t0) to the predicted edge constant across n
    Convergence(CommonArgs),
    /// Density pipelines against the brute-force Gram oracle
    OracleVerify(OracleArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output path; a '.json' extension renders JSON, anything else CSV.
    /// Defaults to CSV on stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Particle counts, overriding the config (repeat or comma-separate)
    #[arg(long = "n", value_delimiter = ',')]
    n: Vec<usize>,

    /// Lower end of the rescaled t grid
    #[arg(long, allow_negative_numbers = true)]
    t_min: Option<f64>,

    /// Upper end of the rescaled t grid
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,

    /// Step of the rescaled t grid
    #[arg(long)]
    t_step: Option<f64>,

    /// Expansion-window constant M (window |t| <= M sqrt(log n))
    #[arg(long = "M")]
    m: Option<f64>,

    /// Basis truncation constant C for the density command
    #[arg(long = "C")]
    c: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Negative control: perturb the norms and require the check to fail
    #[arg(long, hide = true)]
    corrupt_norms: bool,
}

fn main() {
    std::process::exit(run());
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Self::Density(args)
            | Self::EdgeCheck(args)
            | Self::FluctCheck(args)
            | Self::Convergence(args) => args,
            Self::OracleVerify(args) => &args.common,
        }
    }
}

fn run() -> i32 {
    let cli = Cli::parse();
    let common = cli.command.common();
    let outcome = config::load(&common.config).and_then(|cfg| {
        let output = match &cli.command {
            Command::Density(args) => commands::density(&cfg, args),
            Command::EdgeCheck(args) => commands::edge_check(&cfg, args),
            Command::FluctCheck(args) => commands::fluct_check(&cfg, args),
            Command::Convergence(args) => commands::convergence(&cfg, args),
            Command::OracleVerify(args) => {
                commands::oracle_verify(&cfg, &args.common, args.corrupt_norms)
            }
        }?;
        Ok((output, common.out.clone().or(cfg.out)))
    });
    match outcome {
        Ok((output, out_path)) => finish(out_path, output),
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

fn finish(out_path: Option<PathBuf>, output: CommandOutput) -> i32 {
    if let Err(err) = write_table(out_path, &output.table) {
        eprintln!("error: {err}");
        return 3;
    }
    match output.check_failure {
        Some(reason) => {
            eprintln!("check failed: {reason}");
            1
        }
        None => 0,
    }
}

fn write_table(out_path: Option<PathBuf>, table: &Table) -> std::io::Result<()> {
    match out_path {
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
        Some(path) => {
            let rendered = if path.extension().is_some_and(|ext| ext == "json") {
                table.to_json()
            } else {
                table.to_csv()
            };
            std::fs::write(path, rendered)
        }
    }
}
