use std::io::Write;
use std::path::Path;

use tbsg_core::verification::{BruteForceError, OptimalityCheck};
use tbsg_core::{
    bound_report, brute_force_solve, check_optimality, extract_profile, howard_policy_iteration, strategy_iteration,
    value_iteration, Game, GameError, Player, Rational, Scalar, SiError, SiOptions, SiTrace, ValueVector, ViError,
    ViResult,
};

use crate::args::{Method, SolveArgs};
use crate::error::CliError;
use crate::io;

pub fn run(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.exact {
        solve::<Rational>(args, out)
    } else {
        solve::<f64>(args, out)
    }
}

fn solve<T: Scalar>(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.trace.is_some() && args.method == Method::Brute {
        return Err(CliError::General("--trace is not available for --method brute".into()));
    }
    let game: Game<T> = io::load_game(&args.game)?;
    match args.method {
        Method::Vi => vi(&game, args, out),
        Method::Si | Method::Howard => si(&game, args, out),
        Method::Brute => brute(&game, out),
    }
}

fn game_error(e: GameError) -> CliError {
    CliError::Invalid(e.to_string())
}

fn verdict<T: Scalar>(check: &OptimalityCheck<T>, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "optimal: {}", check.optimal)?;
    match check.witness {
        None => Ok(()),
        Some(a) => Err(CliError::CheckFailed(format!(
            "profile is not optimal: action {a} is a profitable switch"
        ))),
    }
}

fn vi<T: Scalar>(game: &Game<T>, args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let epsilon = T::parse_decimal(&args.epsilon)
        .ok_or_else(|| CliError::General(format!("--epsilon: not a number: {:?}", args.epsilon)))?;
    let u0 = ValueVector(vec![T::zero(); game.n()]);
    let result = value_iteration(game, &u0, &epsilon, args.max_iters, args.trace.is_some()).map_err(|e| match e {
        ViError::InvalidEpsilon => CliError::General(format!("{e}; pass a positive --epsilon or a --max-iters")),
        other => CliError::General(other.to_string()),
    })?;
    if let Some(path) = &args.trace {
        write_vi_trace(path, &result)?;
    }
    let profile = extract_profile(game, &result.final_values, None).map_err(|e| CliError::General(e.to_string()))?;
    writeln!(out, "method: vi")?;
    writeln!(out, "iterations: {}", result.iterations)?;
    writeln!(out, "last_delta: {}", result.last_delta.to_decimal())?;
    writeln!(out, "converged: {}", result.converged)?;
    writeln!(out, "profile: {}", io::profile(&profile))?;
    writeln!(out, "values: {}", io::list(&result.final_values.0))?;
    if !result.converged {
        return Err(CliError::NotConverged {
            iterations: result.iterations,
            delta: result.last_delta.to_decimal(),
        });
    }
    let check = check_optimality(game, &profile).map_err(|e| CliError::General(e.to_string()))?;
    verdict(&check, out)
}

fn si<T: Scalar>(game: &Game<T>, args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let options = SiOptions::default();
    let result = if args.method == Method::Howard {
        let player = game
            .mdp_player()
            .ok_or_else(|| CliError::Invalid("--method howard needs a game with a single player".into()))?;
        let mut pi0 = game.first_profile();
        if let Some(path) = &args.sigma0 {
            let start = io::load_strategy(game, path, player)?;
            for (i, c) in start.choice.iter().enumerate() {
                if let Some(a) = c {
                    pi0.0[i] = *a;
                }
            }
        }
        howard_policy_iteration(game, &pi0, &options)
    } else {
        let sigma0 = match &args.sigma0 {
            Some(path) => io::load_strategy(game, path, Player::One)?,
            None => game.first_strategy(Player::One),
        };
        strategy_iteration(game, &sigma0, &options)
    };
    let (profile, trace) = match result {
        Ok(done) => done,
        Err(SiError::Stall { step, trace }) => {
            if let Some(path) = &args.trace {
                write_si_trace(path, game, &trace)?;
            }
            return Err(CliError::Stall(format!(
                "numerical stall at step {step}: switching did not strictly improve the values"
            )));
        }
        Err(SiError::Game(e)) => return Err(game_error(e)),
        Err(SiError::Eval(e)) => return Err(CliError::General(e.to_string())),
    };
    if let Some(path) = &args.trace {
        write_si_trace(path, game, &trace)?;
    }
    let bound = bound_report(&trace, game);
    let method = if args.method == Method::Howard { "howard" } else { "si" };
    writeln!(out, "method: {method}")?;
    writeln!(out, "iterations: {}", trace.iterations)?;
    writeln!(
        out,
        "bound: {} <= {} (L = {}): {}",
        trace.iterations,
        bound.theoretical_bound,
        bound.l,
        if bound.satisfied { "satisfied" } else { "VIOLATED" }
    )?;
    writeln!(out, "profile: {}", io::profile(&profile))?;
    writeln!(out, "values: {}", io::list(&trace.final_values().0))?;
    let check = check_optimality(game, &profile).map_err(|e| CliError::General(e.to_string()))?;
    verdict(&check, out)?;
    if !bound.satisfied {
        return Err(CliError::CheckFailed(format!(
            "{} iterations exceed the bound {}",
            trace.iterations, bound.theoretical_bound
        )));
    }
    Ok(())
}

fn brute<T: Scalar>(game: &Game<T>, out: &mut dyn Write) -> Result<(), CliError> {
    let solution = brute_force_solve(game).map_err(|e| match e {
        BruteForceError::TooLarge { .. } => CliError::GuardExceeded(e.to_string()),
        BruteForceError::NoOptimalProfile | BruteForceError::ValueMismatch { .. } => {
            CliError::CheckFailed(e.to_string())
        }
        BruteForceError::Eval(e) => CliError::General(e.to_string()),
    })?;
    writeln!(out, "method: brute")?;
    writeln!(out, "enumerated: {}", solution.enumerated)?;
    writeln!(out, "optimal_profiles: {}", solution.optimal_profiles)?;
    writeln!(out, "profile: {}", io::profile(&solution.profile))?;
    writeln!(out, "values: {}", io::list(&solution.values.0))?;
    writeln!(out, "optimal: true")?;
    Ok(())
}

/// Columns `k, sigma_0.., tau_0.., v_0..`; a strategy cell is empty at the
/// states its player does not own.
fn write_si_trace<T: Scalar>(path: &Path, game: &Game<T>, trace: &SiTrace<T>) -> Result<(), CliError> {
    let n = game.n();
    let mut w = io::csv_writer(path)?;
    let mut header = vec!["k".to_string()];
    header.extend((0..n).map(|i| format!("sigma_{i}")));
    header.extend((0..n).map(|i| format!("tau_{i}")));
    header.extend((0..n).map(|i| format!("v_{i}")));
    w.write_record(&header)?;
    for (k, step) in trace.steps.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(step.sigma.choice.iter().map(io::cell));
        row.extend(step.tau.choice.iter().map(io::cell));
        row.extend(step.values.0.iter().map(Scalar::to_decimal));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k, v_0..`.
fn write_vi_trace<T: Scalar>(path: &Path, result: &ViResult<T>) -> Result<(), CliError> {
    let n = result.final_values.len();
    let mut w = io::csv_writer(path)?;
    let mut header = vec!["k".to_string()];
    header.extend((0..n).map(|i| format!("v_{i}")));
    w.write_record(&header)?;
    for (k, u) in result.iterates.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(u.0.iter().map(Scalar::to_decimal));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
