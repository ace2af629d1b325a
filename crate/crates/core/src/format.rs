//! JSON game files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "gamma": "0.5",
//!   "owner": [1, 2],
//!   "actions": [
//!     {"source": 0, "cost": "0", "transition": {"1": "1"}},
//!     {"source": 1, "cost": "1", "transition": {"1": "1"}}
//!   ]
//! }
//! ```
//!
//! Numbers are decimal strings so that exact-mode ingestion is lossless.
//! States and actions are 0-based; action ids follow array order.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Action, Game, Player, StrategyProfile, Violation};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum FormatError {
    /// The document is not a well-formed game file.
    #[error("syntax error: {0}")]
    Syntax(String),
    /// The document parsed but describes an invalid game.
    #[error("semantic error: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Semantic(Vec<Violation>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    n: usize,
    gamma: String,
    owner: Vec<u8>,
    actions: Vec<ActionFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionFile {
    source: usize,
    cost: String,
    transition: IndexMap<String, String>,
}

fn number<T: Scalar>(text: &str, what: &str) -> Result<T, FormatError> {
    T::parse_decimal(text).ok_or_else(|| FormatError::Syntax(format!("{what}: not a number: {text:?}")))
}

pub fn parse_game<T: Scalar>(text: &str) -> Result<Game<T>, FormatError> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    let gamma = number(&file.gamma, "gamma")?;
    let mut actions = Vec::with_capacity(file.actions.len());
    for (id, a) in file.actions.iter().enumerate() {
        let cost = number(&a.cost, &format!("action {id} cost"))?;
        let mut transition = Vec::with_capacity(a.transition.len());
        for (state, p) in &a.transition {
            let state: usize = state
                .trim()
                .parse()
                .map_err(|_| FormatError::Syntax(format!("action {id}: bad state index {state:?}")))?;
            transition.push((state, number(p, &format!("action {id} probability"))?));
        }
        actions.push(Action::new(a.source, cost, transition));
    }

    let mut bad_owners = Vec::new();
    let owner: Vec<Player> = file
        .owner
        .iter()
        .enumerate()
        .map(|(state, &raw)| {
            Player::from_number(raw).unwrap_or_else(|| {
                bad_owners.push(Violation::UnknownPlayer { state, value: raw });
                Player::One
            })
        })
        .collect();

    let game = Game::new_unchecked(file.n, gamma, owner, actions);
    let mut violations = bad_owners;
    violations.extend(game.validate());
    if violations.is_empty() {
        Ok(game)
    } else {
        Err(FormatError::Semantic(violations))
    }
}

pub fn serialize_game<T: Scalar>(game: &Game<T>) -> String {
    let file = GameFile {
        n: game.n(),
        gamma: game.gamma().to_decimal(),
        owner: game.owners().iter().map(|p| p.number()).collect(),
        actions: game
            .actions()
            .iter()
            .map(|a| ActionFile {
                source: a.source,
                cost: a.cost.to_decimal(),
                transition: a
                    .transition
                    .iter()
                    .map(|(j, p)| (j.to_string(), p.to_decimal()))
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("game file serializes");
    text.push('\n');
    text
}

/// Profile files are JSON arrays indexed by state holding a global action id
/// or `null`, e.g. `[0, null, 4]`. Strategies leave the other player's
/// states `null`; full profiles fill every entry.
pub fn parse_choices(text: &str) -> Result<Vec<Option<usize>>, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))
}

pub fn serialize_profile(profile: &StrategyProfile) -> String {
    serde_json::to_string(profile.as_slice()).expect("profile serializes")
}
