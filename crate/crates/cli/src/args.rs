use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_CODES: &str = "\
Exit codes:
  0  success (and, for solve, the result passed the optimality check)
  1  I/O or general error
  2  command-line usage error
  3  invalid game file, generator spec or strategy file
  4  value iteration did not converge within --max-iters
  5  brute-force enumeration guard exceeded
  6  numerical stall in floating point strategy iteration
  7  a verification check failed";

#[derive(Debug, Parser)]
#[command(
    name = "tbsg",
    version,
    about = "Solve and verify discounted turn-based stochastic games",
    after_help = EXIT_CODES
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded random game or a structured family member.
    Gen(GenArgs),
    /// Solve a game file.
    Solve(SolveArgs),
    /// Validate a game and check identities, lemmas and the iteration bound.
    Check(CheckArgs),
    /// Run strategy iteration over a sweep of generated games and write a CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of states.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Actions per state: a count such as `3` or an inclusive range such as `2..4`.
    #[arg(long, default_value = "2")]
    pub actions: String,
    /// Transition support size per action (count or range); defaults to `1..min(n, 3)`.
    #[arg(long)]
    pub support: Option<String>,
    /// Owner rule: `alternate`, `mdp` or `random:P` (P = probability of player 1).
    #[arg(long, default_value = "alternate")]
    pub owners: String,
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub cost_lo: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub cost_hi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Structured family instead of a random game: `chain`, `complete` or `mdp-grid`.
    #[arg(long)]
    pub family: Option<String>,
    /// Grid rows for `mdp-grid`.
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    /// Grid columns for `mdp-grid`.
    #[arg(long, default_value_t = 3)]
    pub cols: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Value iteration from the zero vector.
    Vi,
    /// Strategy iteration.
    Si,
    /// Howard's policy iteration (MDPs only).
    Howard,
    /// Exhaustive enumeration of all profiles.
    Brute,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Game file.
    pub game: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Si)]
    pub method: Method,
    /// Value iteration stops once successive iterates are closer than this.
    #[arg(long, default_value = "1e-6")]
    pub epsilon: String,
    /// Value iteration limit; a limit derived from epsilon is used when omitted.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Initial strategy file (JSON array of action ids or null, one per state).
    /// Only entries at the improving player's states are read.
    #[arg(long)]
    pub sigma0: Option<PathBuf>,
    /// Use exact rational arithmetic throughout.
    #[arg(long)]
    pub exact: bool,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Game file.
    pub game: PathBuf,
    /// Validate the game file (the default when no check is selected).
    #[arg(long)]
    pub validate: bool,
    /// Check the flux and modified-cost identities.
    #[arg(long)]
    pub identities: bool,
    /// Run strategy iteration and check the gap lemmas, action elimination
    /// and the iteration bound on its trace.
    #[arg(long)]
    pub lemmas: bool,
    /// Profile file used as `pi` by `--identities`; random when omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Profile file used as `pi'` by `--identities`; random when omitted.
    #[arg(long)]
    pub other_profile: Option<PathBuf>,
    /// Number of random profile pairs for `--identities`.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Seed for random profiles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial strategy file for `--lemmas`.
    #[arg(long)]
    pub sigma0: Option<PathBuf>,
    /// Use exact rational arithmetic throughout.
    #[arg(long)]
    pub exact: bool,
    /// Write one CSV row per individual check.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated state counts.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub n: Vec<usize>,
    /// Comma-separated actions-per-state counts or ranges.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub actions: Vec<String>,
    /// Comma-separated discount factors.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9")]
    pub gamma: Vec<f64>,
    /// Seeds: a half-open range `A..B`, a comma-separated list, or empty.
    #[arg(long, default_value = "0..10")]
    pub seeds: String,
    /// Comma-separated owner rules; `mdp` rows are solved by Howard's algorithm.
    #[arg(long, value_delimiter = ',', default_value = "alternate")]
    pub owners: Vec<String>,
    /// Transition support size (count or range); defaults to `1..min(n, 3)`.
    #[arg(long)]
    pub support: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub cost_lo: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub cost_hi: f64,
    /// Use exact rational arithmetic throughout.
    #[arg(long)]
    pub exact: bool,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
