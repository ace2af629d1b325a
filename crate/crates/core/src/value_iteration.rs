//! The value iteration operator `T`, the strategy extraction operators, and
//! the value iteration loop.

use thiserror::Error;

use crate::evaluation::ValueVector;
use crate::game::{Game, Player, StrategyProfile};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ViError {
    #[error("epsilon must be positive, or zero with an explicit iteration limit")]
    InvalidEpsilon,
    #[error("value vector has length {found}, expected {expected}")]
    Shape { expected: usize, found: usize },
}

#[derive(Clone, Debug)]
pub struct ViResult<T = f64> {
    pub final_values: ValueVector<T>,
    /// `u^0, u^1, ..., u^k` when retention was requested, otherwise empty.
    pub iterates: Vec<ValueVector<T>>,
    pub iterations: usize,
    /// `‖u^{k-1} - u^k‖_∞` at exit.
    pub last_delta: T,
    /// `false` when the iteration limit was hit before the stopping rule.
    pub converged: bool,
}

/// Best action at `state` for its owner given lookahead costs `q`.
///
/// The incumbent is kept whenever it is within `slack` of the optimum;
/// otherwise the optimal action with the smallest global id wins.
pub(crate) fn best_action<T: Scalar>(
    game: &Game<T>,
    state: usize,
    q: &[T],
    incumbent: Option<usize>,
    slack: &T,
) -> usize {
    let ids = game.actions_at(state);
    let better = |a: &T, b: &T| match game.owner(state) {
        Player::One => a < b,
        Player::Two => a > b,
    };
    let mut best = ids[0];
    for &id in &ids[1..] {
        if better(&q[id], &q[best]) || (q[id] == q[best] && id < best) {
            best = id;
        }
    }
    match incumbent {
        Some(inc) => {
            let gain = match game.owner(state) {
                Player::One => q[inc].clone() - q[best].clone(),
                Player::Two => q[best].clone() - q[inc].clone(),
            };
            if gain <= *slack {
                inc
            } else {
                best
            }
        }
        None => best,
    }
}

/// `(Tv)_i = min_{a in A_i} (c + gamma P v)_a` for player-one states, `max` for player-two states.
pub fn apply_t<T: Scalar>(game: &Game<T>, v: &ValueVector<T>) -> Result<ValueVector<T>, ViError> {
    check_len(game, v)?;
    let q = game.lookahead_all(&v.0);
    Ok(ValueVector(
        (0..game.n())
            .map(|i| {
                let ids = game.actions_at(i);
                let first = q[ids[0]].clone();
                ids[1..].iter().fold(first, |acc, &a| match game.owner(i) {
                    Player::One => acc.min_of(q[a].clone()),
                    Player::Two => acc.max_of(q[a].clone()),
                })
            })
            .collect(),
    ))
}

/// Greedy profile with respect to `v`: argmin on player-one states, argmax on
/// player-two states. An incumbent action attaining the optimum is kept;
/// otherwise ties go to the smallest global action id.
pub fn extract_profile<T: Scalar>(
    game: &Game<T>,
    v: &ValueVector<T>,
    incumbent: Option<&StrategyProfile>,
) -> Result<StrategyProfile, ViError> {
    check_len(game, v)?;
    let q = game.lookahead_all(&v.0);
    let zero = T::zero();
    Ok(StrategyProfile(
        (0..game.n())
            .map(|i| best_action(game, i, &q, incumbent.map(|p| p.action(i)), &zero))
            .collect(),
    ))
}

/// A priori iteration limit guaranteeing the `epsilon` stopping rule fires:
/// `ceil(log(epsilon (1 - gamma) / (2R)) / log gamma) + 1` with
/// `R = max(‖c‖_∞, ‖u0 - T u0‖_∞)`.
pub fn default_max_iters<T: Scalar>(game: &Game<T>, u0: &ValueVector<T>, epsilon: f64) -> usize {
    let gamma = game.gamma().to_f64();
    let cost_norm = game.actions().iter().map(|a| a.cost.to_f64().abs()).fold(0.0, f64::max);
    let step = apply_t(game, u0).map(|u1| u1.dist_inf(u0).to_f64()).unwrap_or(0.0);
    let radius = cost_norm.max(step);
    if radius == 0.0 || epsilon <= 0.0 {
        return 1;
    }
    let k = ((epsilon * (1.0 - gamma) / (2.0 * radius)).ln() / gamma.ln()).ceil();
    if k.is_finite() && k > 0.0 {
        k as usize + 1
    } else {
        1
    }
}

/// Iterates `u^{k+1} = T u^k` until `‖u^{k-1} - u^k‖_∞ < epsilon` or
/// `max_iters` applications of `T`. `max_iters = None` selects
/// [`default_max_iters`].
pub fn value_iteration<T: Scalar>(
    game: &Game<T>,
    u0: &ValueVector<T>,
    epsilon: &T,
    max_iters: Option<usize>,
    retain: bool,
) -> Result<ViResult<T>, ViError> {
    check_len(game, u0)?;
    if *epsilon < T::zero() || (epsilon.is_zero() && max_iters.is_none()) {
        return Err(ViError::InvalidEpsilon);
    }
    let limit = max_iters.unwrap_or_else(|| default_max_iters(game, u0, epsilon.to_f64()));

    let mut iterates = Vec::new();
    if retain {
        iterates.push(u0.clone());
    }
    let mut current = u0.clone();
    let mut iterations = 0;
    let mut last_delta = T::zero();
    let mut converged = false;
    while iterations < limit {
        let next = apply_t(game, &current)?;
        last_delta = next.dist_inf(&current);
        current = next;
        iterations += 1;
        if retain {
            iterates.push(current.clone());
        }
        if last_delta < *epsilon {
            converged = true;
            break;
        }
    }
    Ok(ViResult {
        final_values: current,
        iterates,
        iterations,
        last_delta,
        converged,
    })
}

fn check_len<T: Scalar>(game: &Game<T>, v: &ValueVector<T>) -> Result<(), ViError> {
    if v.len() == game.n() {
        Ok(())
    } else {
        Err(ViError::Shape {
            expected: game.n(),
            found: v.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::value_vector;
    use crate::game::Action;

    fn self_loop() -> Game<f64> {
        Game::new(1, 0.5, vec![Player::One], vec![Action::new(0, 1.0, vec![(0, 1.0)])]).unwrap()
    }

    fn two_state() -> Game<f64> {
        Game::new(
            2,
            0.5,
            vec![Player::One, Player::Two],
            vec![
                Action::new(0, 0.0, vec![(1, 1.0)]),
                Action::new(0, 3.0, vec![(0, 1.0)]),
                Action::new(1, 1.0, vec![(1, 1.0)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn operator_partial_sums() {
        let g = self_loop();
        let v1 = apply_t(&g, &ValueVector(vec![0.0])).unwrap();
        assert_eq!(v1.0, vec![1.0]);
        assert_eq!(apply_t(&g, &v1).unwrap().0, vec![1.5]);
    }

    #[test]
    fn operator_minimizes_for_player_one() {
        let g = two_state();
        let t = apply_t(&g, &ValueVector::zeros(2)).unwrap();
        assert_eq!(t[0], 0.0);
        let p = extract_profile(&g, &ValueVector::zeros(2), None).unwrap();
        assert_eq!(p.action(0), 0);
    }

    #[test]
    fn maximizer_takes_largest() {
        let g = Game::new(
            1,
            0.5,
            vec![Player::Two],
            vec![Action::new(0, 1.0, vec![(0, 1.0)]), Action::new(0, 4.0, vec![(0, 1.0)])],
        )
        .unwrap();
        let v = ValueVector(vec![0.0]);
        assert_eq!(apply_t(&g, &v).unwrap().0, vec![4.0]);
        assert_eq!(extract_profile(&g, &v, None).unwrap().0, vec![1]);
    }

    #[test]
    fn optimal_value_is_fixed_point() {
        let g = two_state();
        let v = value_vector(&g, &StrategyProfile(vec![0, 2])).unwrap();
        let tv = apply_t(&g, &v).unwrap();
        assert!(tv.dist_inf(&v) <= 1e-10);
    }

    #[test]
    fn singleton_action_sets_are_forced() {
        let g = self_loop();
        for x in [-5.0, 0.0, 17.0] {
            assert_eq!(extract_profile(&g, &ValueVector(vec![x]), None).unwrap().0, vec![0]);
        }
    }

    #[test]
    fn ties_prefer_incumbent_then_smallest_id() {
        let g = Game::new(
            1,
            0.5,
            vec![Player::One],
            vec![Action::new(0, 2.0, vec![(0, 1.0)]), Action::new(0, 2.0, vec![(0, 1.0)])],
        )
        .unwrap();
        let v = ValueVector(vec![0.0]);
        assert_eq!(extract_profile(&g, &v, None).unwrap().0, vec![0]);
        let incumbent = StrategyProfile(vec![1]);
        assert_eq!(extract_profile(&g, &v, Some(&incumbent)).unwrap().0, vec![1]);
    }

    #[test]
    fn closed_form_stopping_iteration() {
        let g = self_loop();
        let r = value_iteration(&g, &ValueVector(vec![0.0]), &0.1, None, true).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 5);
        assert_eq!(r.final_values.0, vec![1.9375]);
        assert_eq!(r.iterates.len(), 6);
    }

    #[test]
    fn fixed_point_start_stops_immediately() {
        let g = self_loop();
        let r = value_iteration(&g, &ValueVector(vec![2.0]), &1e-6, None, false).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn zero_epsilon_requires_limit() {
        let g = self_loop();
        let u0 = ValueVector(vec![0.0]);
        assert_eq!(
            value_iteration(&g, &u0, &0.0, None, false).unwrap_err(),
            ViError::InvalidEpsilon
        );
        assert_eq!(
            value_iteration(&g, &u0, &-1.0, Some(3), false).unwrap_err(),
            ViError::InvalidEpsilon
        );
        let r = value_iteration(&g, &u0, &0.0, Some(3), false).unwrap();
        assert_eq!((r.iterations, r.converged), (3, false));
        assert_eq!(r.final_values.0, vec![1.75]);
    }

    #[test]
    fn default_limit_is_sufficient() {
        let g = self_loop();
        let u0 = ValueVector(vec![0.0]);
        for eps in [1e-1, 1e-4, 1e-9] {
            let limit = default_max_iters(&g, &u0, eps);
            let r = value_iteration(&g, &u0, &eps, Some(limit), false).unwrap();
            assert!(r.converged, "eps {eps} limit {limit}");
        }
    }
}
