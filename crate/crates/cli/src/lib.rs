//! The `tbsg` command line: `gen`, `solve`, `check` and `bench`.
//!
//! Numbers in text and CSV output use the scalar's decimal rendering:
//! shortest round-trip form for `f64`, exact decimals (or `p/q`) in
//! `--exact` mode. Wall times are seconds.

mod args;
mod bench;
mod check;
mod error;
mod gen;
mod io;
mod solve;

use std::io::Write;

pub use args::{BenchArgs, CheckArgs, Cli, Command, GenArgs, Method, SolveArgs};
pub use bench::{RunRecord, RUN_HEADER};
pub use error::{exit, CliError};

/// Environment variable holding the `bench` worker count (default 1).
pub const WORKERS_VAR: &str = "TBSG_WORKERS";

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(args) => gen::run(args, out),
        Command::Solve(args) => solve::run(args, out),
        Command::Check(args) => check::run(args, out),
        Command::Bench(args) => bench::run(args, out),
    }
}
