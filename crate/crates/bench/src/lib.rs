//! Fixtures shared by the benchmarks.

use tbsg_core::{generate, Game, GenSpec, Scalar};

/// Seeded random game with alternating owners and `actions` actions per state.
pub fn fixture<T: Scalar>(n: usize, actions: usize, gamma: f64, seed: u64) -> Game<T> {
    generate(&GenSpec::new(n, actions, gamma, seed)).expect("benchmark spec is valid")
}
