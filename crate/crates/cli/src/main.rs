use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "moonshine",
    version,
    about = "Exact checks of the monster Lie algebra identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the coefficients c(n) of J = j - 744 for -1 <= n <= N.
    Jexpand {
        #[arg(long, allow_negative_numbers = true)]
        order: i64,
    },
    /// Check p(J(p) - J(q)) = (1 - p/q) prod (1 - p^i q^j)^c(ij) on a window.
    VerifyProduct {
        #[arg(long, default_value_t = 8)]
        pmax: i64,
        #[arg(long, default_value_t = 8)]
        qmax: i64,
    },
    /// Check the traced Euler-Poincare identity for one class.
    VerifyEp {
        /// Class table file (defaults to the shipped catalog).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 8)]
        imax: i64,
        #[arg(long, default_value_t = 8)]
        jmax: i64,
    },
    /// Derive coefficient families from the seeds c(1), c(2), c(3), c(5).
    Derive {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        max: i64,
        /// Report which coefficients the relations cannot determine.
        #[arg(long)]
        audit: bool,
        /// Print a single class as `n<TAB>c(n)` rows.
        #[arg(long)]
        class: Option<String>,
    },
    /// Derive from seeds and compare with the independent series expansions.
    Compare {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        max: i64,
    },
    /// Compare free Lie algebra dimensions of U with the root multiplicities c(mn).
    Witt {
        #[arg(long, default_value_t = 5)]
        mmax: i64,
        #[arg(long, default_value_t = 5)]
        nmax: i64,
    },
    /// Print the leading K x K block of the matrix B and check B1-B3.
    Bmatrix {
        #[arg(long)]
        size: usize,
        /// Also print the block form for simple roots (1,n) with n <= N.
        #[arg(long)]
        blocks: Option<i64>,
    },
    /// List the simple roots (1,-1), (1,n) with their multiplicities.
    SimpleRoots {
        #[arg(long, allow_negative_numbers = true)]
        nmax: i64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = commands::run(&cli.command);
    let mut stdout = std::io::stdout().lock();
    // a closed pipe is not worth a panic
    let _ = stdout.write_all(report.out.as_bytes());
    let _ = stdout.flush();
    if !report.err.is_empty() {
        eprint!("{}", report.err);
    }
    ExitCode::from(report.code)
}
