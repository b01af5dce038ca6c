use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "sinkhorn", version, about = "Sinkhorn scaling of positive matrices")]
struct Cli {
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
pub struct MatrixSource {
    /// Matrix as inline JSON: `[[..],..]` or `{"n":..,"rows":[[..],..]}`.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Matrix file; `.csv` is read as CSV, anything else as JSON.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Clone)]
#[group(required = false, multiple = false)]
pub struct OptionalMatrixSource {
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Order {
    RowFirst,
    ColFirst,
}

#[derive(Subcommand)]
pub enum Command {
    /// Alternate row and column scaling to the doubly stochastic limit.
    Scale {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
        #[arg(long, value_enum, default_value_t = Order::RowFirst)]
        order: Order,
        /// Record the residual after every pass.
        #[arg(long)]
        trace: bool,
    },
    /// Limit via classification and closed forms, falling back to iteration.
    Limit {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Closed-form limit of the block matrix with values M, B, N.
    Mbn {
        #[arg(long = "M")]
        m: f64,
        #[arg(long = "B")]
        b: f64,
        #[arg(long = "N")]
        n: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Canonical limits over geometrically spaced K, as CSV.
    Sweep {
        #[arg(long)]
        label: String,
        #[arg(long)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Output file; CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Exact rational experiments.
    Rational(RationalArgs),
    /// Scaling to prescribed row and column sums.
    Target {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        row_sums: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        col_sums: Vec<f64>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
    },
}

#[derive(Args)]
#[group(id = "mode", required = true, multiple = false, args = ["probe", "cube_root", "trace"])]
pub struct RationalArgs {
    /// Rationality and termination probe for a class; only A2 is supported.
    #[arg(long, requires = "k")]
    pub probe: Option<String>,
    /// Integer parameter for `--probe`.
    #[arg(long = "K")]
    pub k: Option<u64>,
    /// Rational approximations of the cube root of 2 minus 1.
    #[arg(long)]
    pub cube_root: bool,
    /// Exact trace of the matrix given by `--matrix` or `--file`.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub source: OptionalMatrixSource,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Denominator bound in bits.
    #[arg(long)]
    pub max_bits: Option<u64>,
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
    commands::run(cli.command, cli.pretty)
}
