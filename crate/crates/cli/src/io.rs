use std::fs;
use std::path::Path;

use tbsg_core::format::parse_choices;
use tbsg_core::{parse_game, Game, Player, Scalar, Strategy, StrategyProfile};

use crate::error::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_game<T: Scalar>(path: &Path) -> Result<Game<T>, CliError> {
    parse_game(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_choices(path: &Path) -> Result<Vec<Option<usize>>, CliError> {
    parse_choices(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Strategy of `player` read from a choice file; entries at the other
/// player's states are ignored, so a full profile file is accepted too.
pub fn load_strategy<T: Scalar>(game: &Game<T>, path: &Path, player: Player) -> Result<Strategy, CliError> {
    let choices = load_choices(path)?;
    if choices.len() != game.n() {
        return Err(CliError::Invalid(format!(
            "{}: {} entries for {} states",
            path.display(),
            choices.len(),
            game.n()
        )));
    }
    let choice = choices
        .into_iter()
        .enumerate()
        .map(|(i, c)| if game.owner(i) == player { c } else { None })
        .collect();
    let strategy = Strategy { player, choice };
    game.check_strategy(&strategy)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(strategy)
}

pub fn load_profile<T: Scalar>(game: &Game<T>, path: &Path) -> Result<StrategyProfile, CliError> {
    let choices = load_choices(path)?;
    let ids: Option<Vec<usize>> = choices.into_iter().collect();
    let profile =
        StrategyProfile(ids.ok_or_else(|| {
            CliError::Invalid(format!("{}: a profile needs an action at every state", path.display()))
        })?);
    game.check_profile(&profile)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(profile)
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

pub fn list<T: Scalar>(values: &[T]) -> String {
    let items: Vec<String> = values.iter().map(Scalar::to_decimal).collect();
    format!("[{}]", items.join(", "))
}

pub fn profile(profile: &StrategyProfile) -> String {
    let items: Vec<String> = profile.as_slice().iter().map(usize::to_string).collect();
    format!("[{}]", items.join(", "))
}

pub fn cell(choice: &Option<usize>) -> String {
    choice.map(|a| a.to_string()).unwrap_or_default()
}
