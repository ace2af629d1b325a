//! Oracles shared by the integration tests. None of these go through the
//! solvers they are used to check.

#![allow(dead_code)]

use tbsg_core::{generate, Game, GenSpec, OwnerRule, Player, Scalar, Span, Strategy, StrategyProfile};

pub fn spec(n: usize, actions: usize, gamma: f64, seed: u64) -> GenSpec {
    GenSpec {
        n,
        actions_per_state: Span::exactly(actions),
        support_size: Span { lo: 1, hi: n.min(3) },
        owner_rule: OwnerRule::Alternate,
        gamma,
        cost_range: (0.0, 10.0),
        seed,
    }
}

pub fn random_game<T: Scalar>(n: usize, actions: usize, gamma: f64, seed: u64) -> Game<T> {
    generate(&spec(n, actions, gamma, seed)).expect("valid spec")
}

pub fn random_mdp<T: Scalar>(n: usize, actions: usize, gamma: f64, seed: u64) -> Game<T> {
    let mut s = spec(n, actions, gamma, seed);
    s.owner_rule = OwnerRule::Mdp;
    generate(&s).expect("valid spec")
}

/// Every profile of `game`, state 0 varying slowest.
pub fn all_profiles<T: Scalar>(game: &Game<T>) -> Vec<StrategyProfile> {
    let mut out = vec![Vec::new()];
    for i in 0..game.n() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                game.actions_at(i).iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(StrategyProfile).collect()
}

/// Deterministic pseudo-random profile; `salt` selects which.
pub fn pick_profile<T: Scalar>(game: &Game<T>, salt: u64) -> StrategyProfile {
    let mut x = salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    StrategyProfile(
        (0..game.n())
            .map(|i| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                let ids = game.actions_at(i);
                ids[(x % ids.len() as u64) as usize]
            })
            .collect(),
    )
}

/// Dense `P_pi` and `c_pi` built straight from the action list.
pub fn dense_rows(game: &Game<f64>, profile: &StrategyProfile) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = game.n();
    let mut p = vec![vec![0.0; n]; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        let action = game.action(profile.action(i));
        for &(j, prob) in &action.transition {
            p[i][j] += prob;
        }
        c[i] = action.cost;
    }
    (p, c)
}

/// Truncated Neumann series `sum_{k <= terms} (gamma P_pi)^k c_pi`.
pub fn neumann_values(game: &Game<f64>, profile: &StrategyProfile, terms: usize) -> Vec<f64> {
    let (p, c) = dense_rows(game, profile);
    let gamma = *game.gamma();
    let mut term = c.clone();
    let mut sum = c;
    for _ in 0..terms {
        term = p
            .iter()
            .map(|row| gamma * row.iter().zip(&term).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    sum
}

/// All strategies of `player`.
pub fn all_strategies<T: Scalar>(game: &Game<T>, player: Player) -> Vec<Strategy> {
    let mut out = vec![vec![None; game.n()]];
    for i in game.states_of(player).collect::<Vec<_>>() {
        out = out
            .into_iter()
            .flat_map(|base: Vec<Option<usize>>| {
                game.actions_at(i).iter().map(move |&a| {
                    let mut c = base.clone();
                    c[i] = Some(a);
                    c
                })
            })
            .collect();
    }
    out.into_iter().map(|choice| Strategy { player, choice }).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
