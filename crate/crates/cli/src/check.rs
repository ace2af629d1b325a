use std::io::Write;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use tbsg_core::verification::{
    check_action_elimination, check_gap_lemmas, Elimination, LemmaOutcome, IDENTITY_TOLERANCE,
};
use tbsg_core::{
    bound_report, check_identities, check_optimality, strategy_iteration, Game, Player, Rational, Scalar, SiError,
    SiOptions, StrategyProfile,
};

use crate::args::CheckArgs;
use crate::error::CliError;
use crate::io;

/// Columns of the `--csv` report.
pub const CHECK_HEADER: [&str; 7] = ["check", "sample", "item", "lhs", "rhs", "status", "note"];

#[derive(Default)]
struct Report {
    rows: Vec<[String; 7]>,
    failures: Vec<String>,
}

impl Report {
    fn row(&mut self, check: &str, sample: String, item: String, sides: (String, String), status: &str, note: &str) {
        let (lhs, rhs) = sides;
        self.rows
            .push([check.into(), sample, item, lhs, rhs, status.into(), note.into()]);
    }
}

pub fn run(args: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.exact {
        check::<Rational>(args, out)
    } else {
        check::<f64>(args, out)
    }
}

fn check<T: Scalar>(args: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let game: Game<T> = io::load_game(&args.game)?;
    let mut report = Report::default();
    let only_validate = !(args.identities || args.lemmas);

    if args.validate || only_validate {
        writeln!(
            out,
            "validate: pass (n = {}, m = {}, {} profiles)",
            game.n(),
            game.m(),
            game.profile_count()
        )?;
        report.row("validate", String::new(), "game".into(), Default::default(), "pass", "");
    }
    if args.identities {
        identities(&game, args, &mut report, out)?;
    }
    if args.lemmas {
        lemmas(&game, args, &mut report, out)?;
    }

    if let Some(path) = &args.csv {
        let mut w = io::csv_writer(path)?;
        w.write_record(CHECK_HEADER)?;
        for row in &report.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(report.failures.join("; ")))
    }
}

fn random_profile<T: Scalar>(game: &Game<T>, rng: &mut Xoshiro256StarStar) -> StrategyProfile {
    StrategyProfile(
        (0..game.n())
            .map(|i| {
                let ids = game.actions_at(i);
                ids[(rng.next_u64() % ids.len() as u64) as usize]
            })
            .collect(),
    )
}

fn identities<T: Scalar>(
    game: &Game<T>,
    args: &CheckArgs,
    report: &mut Report,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let pi = args.profile.as_deref().map(|p| io::load_profile(game, p)).transpose()?;
    let pi_prime = args
        .other_profile
        .as_deref()
        .map(|p| io::load_profile(game, p))
        .transpose()?;
    let samples = if pi.is_some() && pi_prime.is_some() {
        1
    } else {
        args.samples
    };
    let tolerance = T::slack(IDENTITY_TOLERANCE, &T::zero()).to_decimal();
    let mut rng = Xoshiro256StarStar::seed_from_u64(args.seed);
    let mut worst = T::zero();
    let mut failed = 0;
    for s in 0..samples {
        let a = pi.clone().unwrap_or_else(|| random_profile(game, &mut rng));
        let b = pi_prime.clone().unwrap_or_else(|| random_profile(game, &mut rng));
        let result = check_identities(game, &a, &b).map_err(|e| CliError::General(e.to_string()))?;
        for r in &result.residuals {
            let status = if r.holds { "pass" } else { "fail" };
            report.row(
                "identity",
                s.to_string(),
                r.identity.to_string(),
                (r.residual.to_decimal(), tolerance.clone()),
                status,
                &format!("pi = {} pi' = {}", io::profile(&a), io::profile(&b)),
            );
        }
        worst = worst.max_of(result.max_residual());
        if !result.all_hold() {
            failed += 1;
        }
    }
    let status = if failed == 0 { "pass" } else { "FAIL" };
    writeln!(
        out,
        "identities: {status} ({samples} samples, {failed} failing, max residual {})",
        worst.to_decimal()
    )?;
    if failed > 0 {
        report.failures.push(format!("{failed} identity samples failed"));
    }
    Ok(())
}

fn lemma_row<T: Scalar>(report: &mut Report, sample: &str, item: &str, outcome: &LemmaOutcome<T>) {
    match outcome {
        LemmaOutcome::Holds { lhs, rhs } => report.row(
            "gap_lemma",
            sample.into(),
            item.into(),
            (lhs.to_decimal(), rhs.to_decimal()),
            "pass",
            "",
        ),
        LemmaOutcome::Fails { lhs, rhs } => report.row(
            "gap_lemma",
            sample.into(),
            item.into(),
            (lhs.to_decimal(), rhs.to_decimal()),
            "fail",
            "",
        ),
        LemmaOutcome::Skipped(reason) => report.row(
            "gap_lemma",
            sample.into(),
            item.into(),
            Default::default(),
            "skipped",
            reason,
        ),
    }
}

fn lemmas<T: Scalar>(
    game: &Game<T>,
    args: &CheckArgs,
    report: &mut Report,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let sigma0 = match &args.sigma0 {
        Some(path) => io::load_strategy(game, path, Player::One)?,
        None => game.first_strategy(Player::One),
    };
    let (optimum, trace) = strategy_iteration(game, &sigma0, &SiOptions::default()).map_err(|e| match e {
        SiError::Stall { step, .. } => CliError::Stall(format!("numerical stall at step {step}")),
        SiError::Game(e) => CliError::Invalid(e.to_string()),
        SiError::Eval(e) => CliError::General(e.to_string()),
    })?;

    let optimal = check_optimality(game, &optimum)
        .map_err(|e| CliError::General(e.to_string()))?
        .optimal;
    report.row(
        "optimality",
        String::new(),
        io::profile(&optimum),
        Default::default(),
        if optimal { "pass" } else { "fail" },
        "",
    );
    writeln!(out, "optimality: {}", if optimal { "pass" } else { "FAIL" })?;
    if !optimal {
        report.failures.push("final profile is not optimal".into());
    }

    let bound = bound_report(&trace, game);
    report.row(
        "bound",
        String::new(),
        "N <= (m+1)(1+L)".into(),
        (
            bound.observed_iterations.to_string(),
            bound.theoretical_bound.to_string(),
        ),
        if bound.satisfied { "pass" } else { "fail" },
        &format!("L = {}", bound.l),
    );
    writeln!(
        out,
        "bound: {} (N = {} <= {}, L = {})",
        if bound.satisfied { "pass" } else { "FAIL" },
        bound.observed_iterations,
        bound.theoretical_bound,
        bound.l
    )?;
    if !bound.satisfied {
        report.failures.push("iteration bound violated".into());
    }

    // Triples (pi^k, pi^l, pi*) for every k < l along the trace.
    let profiles: Vec<StrategyProfile> = trace.steps.iter().map(|s| s.profile()).collect();
    let (mut triples, mut applied, mut skipped, mut failed) = (0, 0, 0, 0);
    for k in 0..profiles.len() {
        for l in k + 1..profiles.len() {
            let r = check_gap_lemmas(game, &profiles[k], &profiles[l], &optimum)
                .map_err(|e| CliError::General(e.to_string()))?;
            let sample = format!("{k}:{l}");
            triples += 1;
            for (item, outcome) in [
                ("pointwise_gap", &r.pointwise_gap),
                ("total_gap_upper", &r.total_gap_upper),
                ("shared_action_lower", &r.shared_action_lower),
            ] {
                lemma_row(report, &sample, item, outcome);
                if outcome.failed() {
                    failed += 1;
                } else if outcome.applied() {
                    applied += 1;
                } else {
                    skipped += 1;
                }
            }
        }
    }
    writeln!(
        out,
        "gap lemmas: {} ({triples} triples; {applied} hold, {skipped} skipped, {failed} fail)",
        if failed == 0 { "pass" } else { "FAIL" }
    )?;
    if failed > 0 {
        report.failures.push(format!("{failed} gap lemma instances failed"));
    }

    let elimination = check_action_elimination(&trace, game).map_err(|e| CliError::General(e.to_string()))?;
    for (k, e) in elimination.per_step.iter().enumerate() {
        let (item, status) = match e {
            Elimination::EmptyWindow => (String::new(), "empty_window"),
            Elimination::AlreadyOptimal => (String::new(), "already_optimal"),
            Elimination::Witness(a) => (a.to_string(), "pass"),
            Elimination::Violation => (String::new(), "fail"),
        };
        report.row(
            "action_elimination",
            k.to_string(),
            item,
            Default::default(),
            status,
            "",
        );
    }
    let violations = elimination.violations();
    writeln!(
        out,
        "action elimination: {} (L = {}, {} steps, {} witnesses, {violations} violations)",
        if violations == 0 { "pass" } else { "FAIL" },
        elimination.l,
        elimination.per_step.len(),
        elimination.witnesses()
    )?;
    if violations > 0 {
        report
            .failures
            .push(format!("{violations} action elimination violations"));
    }
    Ok(())
}
