//! Game model: states split between two players, actions with costs and
//! sparse transition distributions, and positional strategies.
//!
//! Player one minimizes the expected total discounted cost, player two
//! maximizes it. An MDP is a game in which every state belongs to one player.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Maximum deviation of a transition row sum from one in floating point mode.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    /// The minimizer.
    One,
    /// The maximizer.
    Two,
}

impl Player {
    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_number(number: u8) -> Option<Self> {
        match number {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }

    pub fn opponent(self) -> Self {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.number())
    }
}

/// An action leaving `source`. Its global id is its position in [`Game::actions`].
#[derive(Clone, Debug, PartialEq)]
pub struct Action<T = f64> {
    pub source: usize,
    pub cost: T,
    /// Sparse distribution over successor states, as `(state, probability)` pairs.
    pub transition: Vec<(usize, T)>,
}

impl<T: Scalar> Action<T> {
    pub fn new(source: usize, cost: T, transition: Vec<(usize, T)>) -> Self {
        Action {
            source,
            cost,
            transition,
        }
    }

    /// Expected value of `v` at the successor state.
    pub fn expectation(&self, v: &[T]) -> T {
        self.transition
            .iter()
            .fold(T::zero(), |acc, (j, p)| acc + p.clone() * v[*j].clone())
    }
}

/// A broken game invariant.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum Violation {
    #[error("game has no states")]
    NoStates,
    #[error("gamma out of range: {0} is not strictly between 0 and 1")]
    GammaOutOfRange(String),
    #[error("owner map not total: {found} owners for {expected} states")]
    OwnerNotTotal { expected: usize, found: usize },
    #[error("state {state}: owner {value} is neither player 1 nor 2")]
    UnknownPlayer { state: usize, value: u8 },
    #[error("empty action set at state {0}")]
    EmptyActionSet(usize),
    #[error("action {action}: source state {state} out of range")]
    SourceOutOfRange { action: usize, state: usize },
    #[error("action {action}: target state {target} out of range")]
    TargetOutOfRange { action: usize, target: usize },
    #[error("action {action}: target state {target} listed twice")]
    DuplicateTarget { action: usize, target: usize },
    #[error("action {action}: negative probability for target {target}")]
    NegativeProbability { action: usize, target: usize },
    #[error("action {action}: transition is not stochastic (sums to {sum})")]
    NotStochastic { action: usize, sum: String },
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid strategy at state {state}: {reason}")]
    InvalidStrategy { state: usize, reason: String },
    #[error("game is not an MDP: both players own states")]
    NotAnMdp,
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A discounted two-player turn-based stochastic game.
#[derive(Clone, Debug, PartialEq)]
pub struct Game<T = f64> {
    n: usize,
    gamma: T,
    owner: Vec<Player>,
    actions: Vec<Action<T>>,
    by_state: Vec<Vec<usize>>,
}

impl<T: Scalar> Game<T> {
    /// Builds a game and rejects it if any invariant is broken.
    pub fn new(n: usize, gamma: T, owner: Vec<Player>, actions: Vec<Action<T>>) -> Result<Self, GameError> {
        let game = Self::new_unchecked(n, gamma, owner, actions);
        let violations = game.validate();
        if violations.is_empty() {
            Ok(game)
        } else {
            Err(GameError::Invalid(violations))
        }
    }

    /// Builds a game without checking invariants. Use [`Game::validate`]
    /// before handing the result to a solver.
    pub fn new_unchecked(n: usize, gamma: T, owner: Vec<Player>, actions: Vec<Action<T>>) -> Self {
        let mut by_state = vec![Vec::new(); n];
        for (id, action) in actions.iter().enumerate() {
            if action.source < n {
                by_state[action.source].push(id);
            }
        }
        Game {
            n,
            gamma,
            owner,
            actions,
            by_state,
        }
    }

    /// Lists every broken invariant; empty iff the game is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push(Violation::NoStates);
        }
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            out.push(Violation::GammaOutOfRange(self.gamma.to_decimal()));
        }
        if self.owner.len() != self.n {
            out.push(Violation::OwnerNotTotal {
                expected: self.n,
                found: self.owner.len(),
            });
        }
        for (state, ids) in self.by_state.iter().enumerate() {
            if ids.is_empty() {
                out.push(Violation::EmptyActionSet(state));
            }
        }
        let tolerance = T::slack(STOCHASTIC_TOLERANCE, &T::zero());
        for (id, action) in self.actions.iter().enumerate() {
            if action.source >= self.n {
                out.push(Violation::SourceOutOfRange {
                    action: id,
                    state: action.source,
                });
            }
            let mut seen = std::collections::HashSet::new();
            let mut sum = T::zero();
            for (target, p) in &action.transition {
                if *target >= self.n {
                    out.push(Violation::TargetOutOfRange {
                        action: id,
                        target: *target,
                    });
                }
                if !seen.insert(*target) {
                    out.push(Violation::DuplicateTarget {
                        action: id,
                        target: *target,
                    });
                }
                if *p < T::zero() {
                    out.push(Violation::NegativeProbability {
                        action: id,
                        target: *target,
                    });
                }
                sum = sum + p.clone();
            }
            if (sum.clone() - T::one()).abs() > tolerance {
                out.push(Violation::NotStochastic {
                    action: id,
                    sum: sum.to_decimal(),
                });
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.actions.len()
    }

    pub fn gamma(&self) -> &T {
        &self.gamma
    }

    pub fn owner(&self, state: usize) -> Player {
        self.owner[state]
    }

    pub fn owners(&self) -> &[Player] {
        &self.owner
    }

    pub fn actions(&self) -> &[Action<T>] {
        &self.actions
    }

    pub fn action(&self, id: usize) -> &Action<T> {
        &self.actions[id]
    }

    /// Global ids of the actions available at `state`, in file order.
    pub fn actions_at(&self, state: usize) -> &[usize] {
        &self.by_state[state]
    }

    pub fn states_of(&self, player: Player) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.owner[i] == player)
    }

    /// The single player owning every state, if the game is an MDP.
    pub fn mdp_player(&self) -> Option<Player> {
        let first = *self.owner.first()?;
        self.owner.iter().all(|&p| p == first).then_some(first)
    }

    /// Number of strategy profiles, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.by_state
            .iter()
            .fold(1u128, |acc, ids| acc.saturating_mul(ids.len() as u128))
    }

    /// `c_a + gamma * P_a v`, the one-step lookahead cost of action `id`.
    pub fn lookahead(&self, id: usize, v: &[T]) -> T {
        let action = &self.actions[id];
        action.cost.clone() + self.gamma.clone() * action.expectation(v)
    }

    /// `c + gamma * P v` for every action.
    pub fn lookahead_all(&self, v: &[T]) -> Vec<T> {
        (0..self.m()).map(|id| self.lookahead(id, v)).collect()
    }

    /// Strategy choosing the smallest global action id at each owned state.
    pub fn first_strategy(&self, player: Player) -> Strategy {
        let choice = (0..self.n)
            .map(|i| (self.owner[i] == player).then(|| self.by_state[i][0]))
            .collect();
        Strategy { player, choice }
    }

    /// Profile choosing the smallest global action id at every state.
    pub fn first_profile(&self) -> StrategyProfile {
        StrategyProfile(self.by_state.iter().map(|ids| ids[0]).collect())
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<(), GameError> {
        if profile.0.len() != self.n {
            return Err(GameError::InvalidStrategy {
                state: profile.0.len().min(self.n),
                reason: format!("profile covers {} of {} states", profile.0.len(), self.n),
            });
        }
        for (state, &id) in profile.0.iter().enumerate() {
            self.check_choice(state, id)?;
        }
        Ok(())
    }

    pub fn check_strategy(&self, strategy: &Strategy) -> Result<(), GameError> {
        if strategy.choice.len() != self.n {
            return Err(GameError::InvalidStrategy {
                state: strategy.choice.len().min(self.n),
                reason: format!("strategy covers {} of {} states", strategy.choice.len(), self.n),
            });
        }
        for (state, choice) in strategy.choice.iter().enumerate() {
            match (self.owner[state] == strategy.player, choice) {
                (true, Some(id)) => self.check_choice(state, *id)?,
                (false, None) => {}
                (true, None) => {
                    return Err(GameError::InvalidStrategy {
                        state,
                        reason: format!("no action chosen for a state of {}", strategy.player),
                    })
                }
                (false, Some(_)) => {
                    return Err(GameError::InvalidStrategy {
                        state,
                        reason: format!("state is not owned by {}", strategy.player),
                    })
                }
            }
        }
        Ok(())
    }

    fn check_choice(&self, state: usize, id: usize) -> Result<(), GameError> {
        if self.by_state[state].contains(&id) {
            Ok(())
        } else {
            Err(GameError::InvalidStrategy {
                state,
                reason: format!("action {id} is not available here"),
            })
        }
    }

    /// Selects the rows of `P` and `c` chosen by `profile`.
    pub fn restrict(&self, profile: &StrategyProfile) -> Result<(Matrix<T>, Vec<T>), GameError> {
        self.check_profile(profile)?;
        let mut transitions = Matrix::<T>::zeros(self.n, self.n);
        let mut costs = Vec::with_capacity(self.n);
        for (i, &id) in profile.0.iter().enumerate() {
            let action = &self.actions[id];
            for (j, p) in &action.transition {
                transitions[(i, *j)] = transitions[(i, *j)].clone() + p.clone();
            }
            costs.push(action.cost.clone());
        }
        Ok((transitions, costs))
    }

    /// Converts every number through its decimal form into another backend.
    pub fn convert<U: Scalar>(&self) -> Game<U> {
        let conv = |x: &T| U::parse_decimal(&x.to_decimal()).expect("decimal round trip");
        Game {
            n: self.n,
            gamma: conv(&self.gamma),
            owner: self.owner.clone(),
            actions: self
                .actions
                .iter()
                .map(|a| Action {
                    source: a.source,
                    cost: conv(&a.cost),
                    transition: a.transition.iter().map(|(j, p)| (*j, conv(p))).collect(),
                })
                .collect(),
            by_state: self.by_state.clone(),
        }
    }
}

/// A positional strategy of one player: an action for each state the player owns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub player: Player,
    /// Indexed by state; `Some` exactly at the player's states.
    pub choice: Vec<Option<usize>>,
}

impl Strategy {
    pub fn get(&self, state: usize) -> Option<usize> {
        self.choice.get(state).copied().flatten()
    }

    /// The chosen global action ids, in state order.
    pub fn actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.choice.iter().filter_map(|c| *c)
    }

    /// Restriction of a full profile to the states of `player`.
    pub fn from_profile<T: Scalar>(game: &Game<T>, profile: &StrategyProfile, player: Player) -> Self {
        let choice = (0..game.n())
            .map(|i| (game.owner(i) == player).then(|| profile.0[i]))
            .collect();
        Strategy { player, choice }
    }
}

/// One action per state, the union of a player-one and a player-two strategy.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(pub Vec<usize>);

impl StrategyProfile {
    /// Combines two strategies of different players. Panics if they overlap
    /// or leave a state uncovered.
    pub fn combine(first: &Strategy, second: &Strategy) -> Self {
        assert_ne!(first.player, second.player, "strategies of the same player");
        let choice = first
            .choice
            .iter()
            .zip(&second.choice)
            .map(|(a, b)| match (a, b) {
                (Some(x), None) | (None, Some(x)) => *x,
                _ => panic!("strategies do not partition the states"),
            })
            .collect();
        StrategyProfile(choice)
    }

    pub fn action(&self, state: usize) -> usize {
        self.0[state]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, action: usize) -> bool {
        self.0.contains(&action)
    }
}
