mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "sardquad",
    version,
    about = "Optimal Sard quadrature on equally spaced nodes"
)]
struct Cli {
    /// Working precision in bits.
    #[arg(
        long,
        global = true,
        env = "QUAD_PRECISION_BITS",
        default_value_t = 256,
        value_parser = clap::value_parser!(u32).range(64..=4096)
    )]
    precision: u32,

    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Grid {
    #[arg(long)]
    m: u64,
    #[arg(long = "N")]
    n: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal weights, boundary-layer coefficients and roots.
    Weights(Grid),
    /// Runs every validator against one rule.
    Validate {
        #[command(flatten)]
        grid: Grid,
        /// Golden oracle file to compare against instead of a fresh exact solve.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Integration errors and observed orders over a list of N.
    Converge {
        #[arg(long)]
        m: u64,
        /// Integrand id from the built-in corpus.
        #[arg(long = "f")]
        f: String,
        #[arg(long = "Ns", value_delimiter = ',', default_value = "4,8,16,32,64")]
        ns: Vec<u64>,
    },
    /// Euler–Frobenius polynomial coefficients (and roots in (-1, 0) for even k).
    Ef {
        #[arg(long)]
        k: u64,
    },
    /// Stencil of the discrete operator and its moment residuals.
    Operator {
        #[command(flatten)]
        grid: Grid,
        /// Half-width of the printed stencil.
        #[arg(long, default_value_t = 10)]
        window: u64,
    },
    /// Exact rational weights from the full linear system, as a golden file.
    Oracle(Grid),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context {
        precision: cli.precision as usize,
        output: cli.output,
        format: cli.format,
    };
    let result = match cli.command {
        Command::Weights(grid) => commands::weights(&ctx, grid),
        Command::Validate { grid, golden } => commands::validate(&ctx, grid, golden.as_deref()),
        Command::Converge { m, f, ns } => commands::converge(&ctx, m, &f, &ns),
        Command::Ef { k } => commands::ef(&ctx, k),
        Command::Operator { grid, window } => commands::operator(&ctx, grid, window),
        Command::Oracle(grid) => commands::oracle(&ctx, grid),
    };
    match result {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
