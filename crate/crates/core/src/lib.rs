//! Solvers for discounted two-player turn-based stochastic games and MDPs.
//!
//! * [`game`]: the game model, strategies and profiles.
//! * [`format`]: the JSON game file format.
//! * [`evaluation`]: value, modified-cost and flux vectors of a fixed profile.
//! * [`value_iteration`]: the operator `T`, greedy extraction and value iteration.
//! * [`strategy_iteration`]: strategy iteration and Howard's policy iteration.
//! * [`verification`]: optimality certificates, an exhaustive oracle and
//!   checks of the identities and bounds behind the iteration bound.
//! * [`generators`]: seeded random instances and structured families.
//!
//! Everything is generic over [`Scalar`]: use `f64` for speed or
//! [`Rational`] for exact arithmetic.

pub mod evaluation;
pub mod format;
pub mod game;
pub mod generators;
pub mod linalg;
pub mod scalar;
pub mod strategy_iteration;
pub mod value_iteration;
pub mod verification;

pub use evaluation::{
    flux_vector, modified_costs, modified_value_vector, modified_value_vector_via_costs, value_vector,
    value_vector_with_costs, EvalError, FluxVector, ModifiedCostVector, ValueVector,
};
pub use format::{parse_game, serialize_game, FormatError};
pub use game::{Action, Game, GameError, Player, Strategy, StrategyProfile, Violation};
pub use generators::{family, generate, FamilyParams, GenError, GenSpec, OwnerRule, Span};
pub use scalar::{Rational, Scalar};
pub use strategy_iteration::{
    howard_policy_iteration, optimal_counter_strategy, strategy_iteration, SiError, SiOptions, SiStep, SiTrace,
};
pub use value_iteration::{apply_t, extract_profile, value_iteration, ViError, ViResult};
pub use verification::{
    bound_report, brute_force_solve, check_action_elimination, check_gap_lemmas, check_identities, check_optimality,
    BoundReport,
};
