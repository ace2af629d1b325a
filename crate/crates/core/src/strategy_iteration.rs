//! Strategy iteration for two-player games and Howard's policy iteration
//! for MDPs.
//!
//! Each round computes an optimal counter-strategy of player two against the
//! current player-one strategy, evaluates the resulting profile, and switches
//! every player-one state to a greedy action with respect to that value
//! vector. Ties are resolved in favour of the current action, which is what
//! makes the loop terminate.

use thiserror::Error;

use crate::evaluation::{value_vector, EvalError, ValueVector};
use crate::game::{Game, GameError, Player, Strategy, StrategyProfile};
use crate::scalar::Scalar;
use crate::value_iteration::best_action;
use crate::verification::check_optimality;

/// Default relative margin by which a floating point switch must improve.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SiOptions {
    /// An action replaces the incumbent only if it improves by more than
    /// `improvement_tolerance * (1 + ‖v‖_∞)`. Ignored in exact mode.
    pub improvement_tolerance: f64,
    /// Start each counter-strategy computation from the previous one.
    pub warm_start: bool,
}

impl Default for SiOptions {
    fn default() -> Self {
        SiOptions {
            improvement_tolerance: IMPROVEMENT_TOLERANCE,
            warm_start: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiStep<T = f64> {
    pub sigma: Strategy,
    pub tau: Strategy,
    pub values: ValueVector<T>,
    /// Evaluations spent computing `tau`.
    pub counter_iterations: usize,
}

impl<T> SiStep<T> {
    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile::combine(&self.sigma, &self.tau)
    }
}

/// Record of a strategy iteration run: one step per evaluated profile.
#[derive(Clone, Debug, PartialEq)]
pub struct SiTrace<T = f64> {
    pub steps: Vec<SiStep<T>>,
    /// Number of rounds `N`; the improvement of round `N - 1` reproduced its input.
    pub iterations: usize,
    pub terminated_optimal: bool,
}

impl<T: Scalar> SiTrace<T> {
    pub fn final_step(&self) -> &SiStep<T> {
        self.steps.last().expect("trace has at least one step")
    }

    pub fn final_profile(&self) -> StrategyProfile {
        self.final_step().profile()
    }

    pub fn final_values(&self) -> &ValueVector<T> {
        &self.final_step().values
    }

    /// Player-one strategies `sigma^0, ..., sigma^N`, where `sigma^N = sigma^{N-1}`.
    pub fn sigmas(&self) -> Vec<&Strategy> {
        let mut out: Vec<&Strategy> = self.steps.iter().map(|s| &s.sigma).collect();
        out.push(&self.final_step().sigma);
        out
    }
}

#[derive(Debug, Error)]
pub enum SiError<T: Scalar> {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// A switch failed to improve the values, which only rounding can cause.
    #[error("numerical stall at step {step}: switching did not strictly improve the values")]
    Stall { step: usize, trace: Box<SiTrace<T>> },
}

/// Result of a best-response computation.
#[derive(Clone, Debug)]
pub struct CounterStrategy<T = f64> {
    pub strategy: Strategy,
    /// Value vector of the fixed strategy combined with `strategy`.
    pub values: ValueVector<T>,
    pub iterations: usize,
}

fn empty_strategy(n: usize, player: Player) -> Strategy {
    Strategy {
        player,
        choice: vec![None; n],
    }
}

/// `true` when `next` is at least as good as `prev` for `player` up to
/// `slack` and strictly better in some coordinate.
fn strictly_improves<T: Scalar>(player: Player, prev: &ValueVector<T>, next: &ValueVector<T>, slack: &T) -> bool {
    let (better, worse) = prev.0.iter().zip(&next.0).fold((false, false), |(b, w), (old, new)| {
        let (gain, loss) = match player {
            Player::One => (new < old, new.clone() > old.clone() + slack.clone()),
            Player::Two => (new > old, new.clone() < old.clone() - slack.clone()),
        };
        (b || gain, w || loss)
    });
    better && !worse
}

/// Greedy update of `current` on the states of `current.player`.
fn improve<T: Scalar>(game: &Game<T>, current: &Strategy, values: &ValueVector<T>, tolerance: f64) -> Strategy {
    let q = game.lookahead_all(&values.0);
    let slack = T::slack(tolerance, &values.norm_inf());
    Strategy {
        player: current.player,
        choice: current
            .choice
            .iter()
            .enumerate()
            .map(|(i, c)| c.map(|inc| best_action(game, i, &q, Some(inc), &slack)))
            .collect(),
    }
}

type Evaluated<T> = Vec<(Strategy, ValueVector<T>)>;

enum LoopError<T> {
    Eval(EvalError),
    Stall(usize, Evaluated<T>),
}

/// Policy iteration for the owner of `start` with `fixed` frozen.
/// Returns every evaluated strategy with its value vector.
fn policy_iteration_loop<T: Scalar>(
    game: &Game<T>,
    fixed: &Strategy,
    start: Strategy,
    tolerance: f64,
) -> Result<Evaluated<T>, LoopError<T>> {
    let player = start.player;
    let mut evaluated: Vec<(Strategy, ValueVector<T>)> = Vec::new();
    let mut current = start;
    loop {
        let profile = match player {
            Player::One => StrategyProfile::combine(&current, fixed),
            Player::Two => StrategyProfile::combine(fixed, &current),
        };
        let values = value_vector(game, &profile).map_err(LoopError::Eval)?;
        if let Some((_, prev)) = evaluated.last() {
            let slack = T::slack(tolerance, &prev.norm_inf());
            if !strictly_improves(player, prev, &values, &slack) {
                let step = evaluated.len();
                evaluated.push((current, values));
                return Err(LoopError::Stall(step, evaluated));
            }
        }
        let next = improve(game, &current, &values, tolerance);
        let stable = next == current;
        evaluated.push((current, values));
        if stable {
            return Ok(evaluated);
        }
        current = next;
    }
}

/// Optimal counter-strategy against `fixed`, starting from the smallest-id strategy.
pub fn optimal_counter_strategy<T: Scalar>(game: &Game<T>, fixed: &Strategy) -> Result<CounterStrategy<T>, SiError<T>> {
    optimal_counter_strategy_from(game, fixed, None, &SiOptions::default())
}

/// Optimal counter-strategy against `fixed` by policy iteration on the game
/// restricted to `fixed`, starting from `start` if given.
pub fn optimal_counter_strategy_from<T: Scalar>(
    game: &Game<T>,
    fixed: &Strategy,
    start: Option<&Strategy>,
    options: &SiOptions,
) -> Result<CounterStrategy<T>, SiError<T>> {
    game.check_strategy(fixed)?;
    let player = fixed.player.opponent();
    let start = match start {
        Some(s) => {
            game.check_strategy(s)?;
            s.clone()
        }
        None => game.first_strategy(player),
    };
    match policy_iteration_loop(game, fixed, start, options.improvement_tolerance) {
        Ok(mut evaluated) => {
            let iterations = evaluated.len();
            let (strategy, values) = evaluated.pop().expect("at least one evaluation");
            Ok(CounterStrategy {
                strategy,
                values,
                iterations,
            })
        }
        Err(LoopError::Eval(e)) => Err(e.into()),
        Err(LoopError::Stall(step, evaluated)) => Err(SiError::Stall {
            step,
            trace: Box::new(counter_trace(fixed, evaluated)),
        }),
    }
}

fn counter_trace<T: Scalar>(fixed: &Strategy, evaluated: Vec<(Strategy, ValueVector<T>)>) -> SiTrace<T> {
    let steps: Vec<SiStep<T>> = evaluated
        .into_iter()
        .map(|(s, values)| {
            let (sigma, tau) = match fixed.player {
                Player::One => (fixed.clone(), s),
                Player::Two => (s, fixed.clone()),
            };
            SiStep {
                sigma,
                tau,
                values,
                counter_iterations: 0,
            }
        })
        .collect();
    SiTrace {
        iterations: steps.len(),
        steps,
        terminated_optimal: false,
    }
}

/// Strategy iteration from the player-one strategy `sigma0`.
pub fn strategy_iteration<T: Scalar>(
    game: &Game<T>,
    sigma0: &Strategy,
    options: &SiOptions,
) -> Result<(StrategyProfile, SiTrace<T>), SiError<T>> {
    if sigma0.player != Player::One {
        return Err(GameError::InvalidStrategy {
            state: 0,
            reason: "initial strategy must belong to player 1".into(),
        }
        .into());
    }
    game.check_strategy(sigma0)?;

    let mut steps: Vec<SiStep<T>> = Vec::new();
    let mut sigma = sigma0.clone();
    let mut previous_tau: Option<Strategy> = None;
    loop {
        let warm = if options.warm_start {
            previous_tau.as_ref()
        } else {
            None
        };
        let counter = optimal_counter_strategy_from(game, &sigma, warm, options)?;
        if let Some(prev) = steps.last() {
            let slack = T::slack(options.improvement_tolerance, &prev.values.norm_inf());
            if !strictly_improves(Player::One, &prev.values, &counter.values, &slack) {
                let step = steps.len();
                steps.push(SiStep {
                    sigma,
                    tau: counter.strategy,
                    values: counter.values,
                    counter_iterations: counter.iterations,
                });
                return Err(SiError::Stall {
                    step,
                    trace: Box::new(SiTrace {
                        iterations: steps.len(),
                        steps,
                        terminated_optimal: false,
                    }),
                });
            }
        }
        let next = improve(game, &sigma, &counter.values, options.improvement_tolerance);
        let stable = next == sigma;
        previous_tau = Some(counter.strategy.clone());
        steps.push(SiStep {
            sigma,
            tau: counter.strategy,
            values: counter.values,
            counter_iterations: counter.iterations,
        });
        if stable {
            break;
        }
        sigma = next;
    }
    finish(game, steps)
}

/// Howard's policy iteration on an MDP from the full profile `pi0`.
pub fn howard_policy_iteration<T: Scalar>(
    game: &Game<T>,
    pi0: &StrategyProfile,
    options: &SiOptions,
) -> Result<(StrategyProfile, SiTrace<T>), SiError<T>> {
    let player = game.mdp_player().ok_or(GameError::NotAnMdp)?;
    game.check_profile(pi0)?;
    let start = Strategy::from_profile(game, pi0, player);
    let fixed = empty_strategy(game.n(), player.opponent());
    let evaluated = policy_iteration_loop(game, &fixed, start, options.improvement_tolerance);
    let (stall, evaluated) = match evaluated {
        Ok(e) => (None, e),
        Err(LoopError::Eval(e)) => return Err(e.into()),
        Err(LoopError::Stall(step, e)) => (Some(step), e),
    };
    let steps = evaluated
        .into_iter()
        .map(|(s, values)| {
            let (sigma, tau) = match player {
                Player::One => (s, fixed.clone()),
                Player::Two => (fixed.clone(), s),
            };
            SiStep {
                sigma,
                tau,
                values,
                counter_iterations: 1,
            }
        })
        .collect::<Vec<_>>();
    if let Some(step) = stall {
        return Err(SiError::Stall {
            step,
            trace: Box::new(SiTrace {
                iterations: steps.len(),
                steps,
                terminated_optimal: false,
            }),
        });
    }
    finish(game, steps)
}

fn finish<T: Scalar>(game: &Game<T>, steps: Vec<SiStep<T>>) -> Result<(StrategyProfile, SiTrace<T>), SiError<T>> {
    let profile = steps.last().expect("at least one step").profile();
    let terminated_optimal = check_optimality(game, &profile)?.optimal;
    Ok((
        profile,
        SiTrace {
            iterations: steps.len(),
            steps,
            terminated_optimal,
        },
    ))
}
