//! Evaluation of a fixed strategy profile: value vectors, modified costs,
//! modified value vectors and flux vectors, all by direct linear solves
//! against `I - gamma * P_pi`.

use thiserror::Error;

use crate::game::{Game, GameError, StrategyProfile};
use crate::linalg::{Matrix, SingularMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Game(#[from] GameError),
    /// `I - gamma * P_pi` is always invertible for a valid game, so this
    /// signals a broken invariant upstream.
    #[error("internal error: evaluation system is singular: {0}")]
    Singular(#[from] SingularMatrix),
    #[error("vector has length {found}, expected {expected}")]
    Shape { expected: usize, found: usize },
}

/// Expected total discounted cost from each start state.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueVector<T = f64>(pub Vec<T>);

/// Reduced costs `c - (J - gamma P) v`, one entry per action.
#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedCostVector<T = f64>(pub Vec<T>);

/// The row vector `e^T (I - gamma P_pi)^-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxVector<T = f64>(pub Vec<T>);

macro_rules! vector_newtype {
    ($name:ident) => {
        impl<T: Scalar> $name<T> {
            pub fn as_slice(&self) -> &[T] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn to_f64(&self) -> Vec<f64> {
                self.0.iter().map(Scalar::to_f64).collect()
            }
        }

        impl<T> std::ops::Index<usize> for $name<T> {
            type Output = T;

            fn index(&self, i: usize) -> &T {
                &self.0[i]
            }
        }
    };
}

vector_newtype!(ValueVector);
vector_newtype!(ModifiedCostVector);
vector_newtype!(FluxVector);

impl<T: Scalar> ValueVector<T> {
    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![T::zero(); n])
    }

    pub fn norm_inf(&self) -> T {
        crate::scalar::norm_inf(&self.0)
    }

    pub fn sum(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, x| acc + x.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        ValueVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        )
    }

    /// `‖self - other‖_∞`.
    pub fn dist_inf(&self, other: &Self) -> T {
        self.sub(other).norm_inf()
    }

    /// Componentwise `self <= other + slack`.
    pub fn le_within(&self, other: &Self, slack: &T) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| *a <= b.clone() + slack.clone())
    }
}

fn system<T: Scalar>(game: &Game<T>, profile: &StrategyProfile) -> Result<(Matrix<T>, Vec<T>), EvalError> {
    let (transitions, costs) = game.restrict(profile)?;
    Ok((transitions.identity_minus_scaled(game.gamma()), costs))
}

/// Solves `(I - gamma P_pi) v = c_pi`.
pub fn value_vector<T: Scalar>(game: &Game<T>, profile: &StrategyProfile) -> Result<ValueVector<T>, EvalError> {
    let (matrix, costs) = system(game, profile)?;
    Ok(ValueVector(matrix.solve(&costs)?))
}

/// Value vector of `profile` when action costs are replaced by `costs`
/// (one entry per action).
pub fn value_vector_with_costs<T: Scalar>(
    game: &Game<T>,
    profile: &StrategyProfile,
    costs: &[T],
) -> Result<ValueVector<T>, EvalError> {
    if costs.len() != game.m() {
        return Err(EvalError::Shape {
            expected: game.m(),
            found: costs.len(),
        });
    }
    let (matrix, _) = system(game, profile)?;
    let selected: Vec<T> = profile.as_slice().iter().map(|&a| costs[a].clone()).collect();
    Ok(ValueVector(matrix.solve(&selected)?))
}

/// `(c^v)_a = c_a - v_{s(a)} + gamma * P_a v` for every action `a`.
pub fn modified_costs<T: Scalar>(game: &Game<T>, v: &ValueVector<T>) -> Result<ModifiedCostVector<T>, EvalError> {
    if v.len() != game.n() {
        return Err(EvalError::Shape {
            expected: game.n(),
            found: v.len(),
        });
    }
    Ok(ModifiedCostVector(
        game.actions()
            .iter()
            .enumerate()
            .map(|(id, a)| game.lookahead(id, &v.0) - v[a.source].clone())
            .collect(),
    ))
}

/// `v_other - v_base`, computed as the difference of two evaluations.
pub fn modified_value_vector<T: Scalar>(
    game: &Game<T>,
    base: &StrategyProfile,
    other: &StrategyProfile,
) -> Result<ValueVector<T>, EvalError> {
    Ok(value_vector(game, other)?.sub(&value_vector(game, base)?))
}

/// `v_other - v_base`, computed as the value of `other` under the modified
/// costs of `base`. Must agree with [`modified_value_vector`].
pub fn modified_value_vector_via_costs<T: Scalar>(
    game: &Game<T>,
    base: &StrategyProfile,
    other: &StrategyProfile,
) -> Result<ValueVector<T>, EvalError> {
    let reduced = modified_costs(game, &value_vector(game, base)?)?;
    value_vector_with_costs(game, other, &reduced.0)
}

/// Solves `x (I - gamma P_pi) = e^T`.
pub fn flux_vector<T: Scalar>(game: &Game<T>, profile: &StrategyProfile) -> Result<FluxVector<T>, EvalError> {
    let (matrix, _) = system(game, profile)?;
    Ok(FluxVector(matrix.solve_left(&vec![T::one(); game.n()])?))
}

/// Inner product of a flux vector with the entries of `per_action`
/// selected by `profile`.
pub fn flux_pairing<T: Scalar>(flux: &FluxVector<T>, profile: &StrategyProfile, per_action: &[T]) -> T {
    flux.0
        .iter()
        .zip(profile.as_slice())
        .fold(T::zero(), |acc, (x, &a)| acc + x.clone() * per_action[a].clone())
}
