use std::io::Write;

use tbsg_core::{family, generate, serialize_game, FamilyParams, Game, GenError, GenSpec, OwnerRule, Rational, Span};

use crate::args::GenArgs;
use crate::error::CliError;
use crate::io;

fn invalid(e: GenError) -> CliError {
    CliError::Invalid(e.to_string())
}

pub fn spec_from(
    n: usize,
    actions: &str,
    support: Option<&str>,
    owners: &str,
    gamma: f64,
    costs: (f64, f64),
    seed: u64,
) -> Result<GenSpec, CliError> {
    let mut spec = GenSpec::new(n, 1, gamma, seed);
    spec.actions_per_state = actions.parse::<Span>().map_err(invalid)?;
    if let Some(support) = support {
        spec.support_size = support.parse::<Span>().map_err(invalid)?;
    }
    spec.owner_rule = owners.parse::<OwnerRule>().map_err(invalid)?;
    spec.cost_range = costs;
    spec.check().map_err(invalid)?;
    Ok(spec)
}

pub fn run(args: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    // Generated numbers are exact decimals, so the rational backend
    // serializes them without rounding.
    let game: Game<Rational> = match &args.family {
        Some(name) => {
            let actions = args.actions.parse::<Span>().map_err(invalid)?;
            if actions.lo != actions.hi {
                return Err(CliError::Invalid("families take a single --actions count".into()));
            }
            let params = FamilyParams {
                n: args.n,
                actions_per_state: actions.lo,
                rows: args.rows,
                cols: args.cols,
                gamma: args.gamma,
                seed: args.seed,
            };
            family(name, &params).map_err(invalid)?
        }
        None => {
            let spec = spec_from(
                args.n,
                &args.actions,
                args.support.as_deref(),
                &args.owners,
                args.gamma,
                (args.cost_lo, args.cost_hi),
                args.seed,
            )?;
            generate(&spec).map_err(invalid)?
        }
    };
    let text = serialize_game(&game);
    match &args.out {
        Some(path) => {
            io::write(path, &text)?;
            writeln!(
                out,
                "wrote {}: n = {}, m = {}, {} profiles",
                path.display(),
                game.n(),
                game.m(),
                game.profile_count()
            )?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
