use std::env;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use tbsg_core::{
    bound_report, check_optimality, generate, howard_policy_iteration, strategy_iteration, Game, GenSpec, OwnerRule,
    Player, Rational, Scalar, SiError, SiOptions,
};

use crate::args::BenchArgs;
use crate::error::CliError;
use crate::gen::spec_from;
use crate::WORKERS_VAR;

/// Column order of the runs CSV.
pub const RUN_HEADER: [&str; 14] = [
    "instance",
    "seed",
    "n",
    "m",
    "gamma",
    "owners",
    "solver",
    "iterations",
    "bound",
    "bound_ratio",
    "wall_time",
    "converged",
    "optimal",
    "error",
];

/// One solved instance of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub owners: String,
    /// `si`, or `howard` for single-player games.
    pub solver: String,
    pub iterations: usize,
    pub bound: f64,
    /// `iterations / bound`.
    pub bound_ratio: f64,
    /// Seconds.
    pub wall_time: f64,
    /// The solver terminated normally.
    pub converged: bool,
    /// The final profile passed the optimality check.
    pub optimal: bool,
    /// Error message when the run failed; empty otherwise.
    pub error: String,
}

impl RunRecord {
    pub fn bound_violated(&self) -> bool {
        self.converged && self.bound_ratio > 1.0
    }

    pub fn to_row(&self) -> [String; 14] {
        [
            self.instance.clone(),
            self.seed.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.gamma.to_string(),
            self.owners.clone(),
            self.solver.clone(),
            self.iterations.to_string(),
            self.bound.to_string(),
            self.bound_ratio.to_string(),
            format!("{:.6}", self.wall_time),
            self.converged.to_string(),
            self.optimal.to_string(),
            self.error.clone(),
        ]
    }
}

/// Parses `A..B` (half-open), a comma-separated list, or the empty string.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let text = text.trim();
    let bad = || {
        CliError::General(format!(
            "--seeds: expected A..B or a comma-separated list, got {text:?}"
        ))
    };
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        return Ok((lo..hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn workers() -> Result<usize, CliError> {
    match env::var(WORKERS_VAR) {
        Err(_) => Ok(1),
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(CliError::General(format!(
                "{WORKERS_VAR} must be a positive integer, got {text:?}"
            ))),
        },
    }
}

/// The sweep in output order: n, actions, gamma, owners, then seed.
fn sweep(args: &BenchArgs) -> Result<Vec<(String, GenSpec)>, CliError> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut specs = Vec::new();
    for &n in &args.n {
        for actions in &args.actions {
            for &gamma in &args.gamma {
                for owners in &args.owners {
                    for &seed in &seeds {
                        let spec = spec_from(
                            n,
                            actions,
                            args.support.as_deref(),
                            owners,
                            gamma,
                            (args.cost_lo, args.cost_hi),
                            seed,
                        )?;
                        let id = format!("n{n}-a{actions}-g{gamma}-{owners}-s{seed}");
                        specs.push((id, spec));
                    }
                }
            }
        }
    }
    Ok(specs)
}

/// Generates and solves one instance, re-verifying optimality.
pub fn run_one<T: Scalar>(instance: &str, spec: &GenSpec) -> RunRecord {
    let mut record = RunRecord {
        instance: instance.to_string(),
        seed: spec.seed,
        n: spec.n,
        m: 0,
        gamma: spec.gamma,
        owners: spec.owner_rule.to_string(),
        solver: if spec.owner_rule == OwnerRule::Mdp {
            "howard"
        } else {
            "si"
        }
        .into(),
        iterations: 0,
        bound: 0.0,
        bound_ratio: 0.0,
        wall_time: 0.0,
        converged: false,
        optimal: false,
        error: String::new(),
    };
    let game: Game<T> = match generate(spec) {
        Ok(g) => g,
        Err(e) => {
            record.error = e.to_string();
            return record;
        }
    };
    record.m = game.m();
    // A random owner rule can still produce a single-player game.
    if game.mdp_player().is_some() {
        record.solver = "howard".into();
    }
    let options = SiOptions::default();
    let started = Instant::now();
    let result = if record.solver == "howard" {
        howard_policy_iteration(&game, &game.first_profile(), &options)
    } else {
        strategy_iteration(&game, &game.first_strategy(Player::One), &options)
    };
    record.wall_time = started.elapsed().as_secs_f64();
    let trace = match result {
        Ok((_, trace)) => {
            record.converged = true;
            trace
        }
        Err(SiError::Stall { trace, .. }) => {
            record.error = "numerical stall".into();
            *trace
        }
        Err(e) => {
            record.error = e.to_string();
            return record;
        }
    };
    let bound = bound_report(&trace, &game);
    record.iterations = bound.observed_iterations;
    record.bound = bound.theoretical_bound;
    record.bound_ratio = bound.ratio();
    if record.converged {
        match check_optimality(&game, &trace.final_profile()) {
            Ok(check) => record.optimal = check.optimal,
            Err(e) => record.error = e.to_string(),
        }
    }
    record
}

pub fn run(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let specs = sweep(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers()?)
        .build()
        .map_err(|e| CliError::General(e.to_string()))?;
    // Indexed parallel collection keeps sweep order regardless of completion order.
    let records: Vec<RunRecord> = pool.install(|| {
        specs
            .par_iter()
            .map(|(id, spec)| {
                if args.exact {
                    run_one::<Rational>(id, spec)
                } else {
                    run_one::<f64>(id, spec)
                }
            })
            .collect()
    });

    let mut text = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut text);
        w.write_record(RUN_HEADER)?;
        for r in &records {
            w.write_record(r.to_row())?;
        }
        w.flush()?;
    }

    let violations = records.iter().filter(|r| r.bound_violated()).count();
    let errors = records.iter().filter(|r| !r.error.is_empty()).count();
    let not_optimal = records.iter().filter(|r| r.converged && !r.optimal).count();
    let max_ratio = records.iter().map(|r| r.bound_ratio).fold(0.0, f64::max);
    let summary = format!(
        "bench: {} runs, {violations} bound violations, {errors} errors, {not_optimal} not optimal, max bound_ratio {max_ratio}",
        records.len()
    );
    match &args.out {
        Some(path) => {
            crate::io::write(path, std::str::from_utf8(&text).expect("csv output is UTF-8"))?;
            writeln!(out, "{summary}")?;
        }
        None => {
            out.write_all(&text)?;
            eprintln!("{summary}");
        }
    }
    if violations + errors + not_optimal > 0 {
        return Err(CliError::CheckFailed(summary));
    }
    Ok(())
}
