mod common;

use common::*;
use num_traits::Signed;
use proptest::prelude::*;
use tbsg_core::{
    check_identities, flux_vector, modified_costs, modified_value_vector, modified_value_vector_via_costs,
    value_vector, Game, Rational, Scalar,
};

#[test]
fn neumann_series_matches_linear_solve() {
    for seed in 0..20 {
        let game: Game<f64> = random_game(5, 3, 0.5, seed);
        let profile = pick_profile(&game, seed);
        let direct = value_vector(&game, &profile).unwrap();
        let series = neumann_values(&game, &profile, 200);
        assert!(max_abs_diff(&direct.0, &series) <= 1e-9, "seed {seed}");
    }
}

#[test]
fn neumann_truncation_error_is_bounded() {
    let game: Game<f64> = random_game(6, 2, 0.9, 11);
    let profile = pick_profile(&game, 3);
    let exact = value_vector(&game, &profile).unwrap();
    let cost_norm = game.actions().iter().map(|a| a.cost.abs()).fold(0.0, f64::max);
    for terms in [0usize, 1, 5, 20, 60] {
        let series = neumann_values(&game, &profile, terms);
        let bound = 0.9f64.powi(terms as i32 + 1) * cost_norm / (1.0 - 0.9);
        assert!(max_abs_diff(&exact.0, &series) <= bound + 1e-12, "K = {terms}");
    }
}

#[test]
fn two_state_example_values() {
    let text = r#"{"n": 2, "gamma": "0.5", "owner": [1, 2], "actions": [
        {"source": 0, "cost": "0", "transition": {"1": "1"}},
        {"source": 0, "cost": "3", "transition": {"0": "1"}},
        {"source": 1, "cost": "1", "transition": {"1": "1"}}]}"#;
    let game: Game<f64> = tbsg_core::parse_game(text).unwrap();
    let base = tbsg_core::StrategyProfile(vec![0, 2]);
    assert_eq!(value_vector(&game, &base).unwrap().0, vec![1.0, 2.0]);
    let reduced = modified_costs(&game, &value_vector(&game, &base).unwrap()).unwrap();
    assert_eq!(reduced[1], 2.5);
    let flux = flux_vector(&game, &base).unwrap();
    assert!((flux.0.iter().sum::<f64>() - 4.0).abs() < 1e-12);
}

#[test]
fn flux_pairs_with_costs() {
    for seed in 0..20 {
        let game: Game<f64> = random_game(6, 2, 0.9, seed);
        let profile = pick_profile(&game, seed + 100);
        let v = value_vector(&game, &profile).unwrap();
        let x = flux_vector(&game, &profile).unwrap();
        let pairing: f64 = (0..6).map(|i| x[i] * game.action(profile.action(i)).cost).sum();
        assert!((v.sum() - pairing).abs() <= 1e-9, "seed {seed}");
    }
}

fn exact_residual(game: &Game<Rational>, profile: &tbsg_core::StrategyProfile) -> Rational {
    let v = value_vector(game, profile).unwrap();
    let (p, c) = game.restrict(profile).unwrap();
    let pv = p.mul_vec(&v.0);
    (0..game.n())
        .map(|i| (v[i].clone() - game.gamma().clone() * pv[i].clone() - c[i].clone()).abs())
        .fold(Rational::from_i64(0), |a, b| a.max_of(b))
}

#[test]
fn exact_evaluation_has_zero_residual() {
    for seed in 0..10 {
        let game: Game<Rational> = random_game(4, 2, 0.9, seed);
        let profile = pick_profile(&game, seed);
        assert_eq!(exact_residual(&game, &profile), Rational::from_i64(0));
        let report = check_identities(&game, &profile, &pick_profile(&game, seed + 7)).unwrap();
        assert!(report.residuals.iter().all(|r| r.residual == Rational::from_i64(0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_invariants(seed in any::<u64>(), n in 1usize..7, actions in 1usize..4, gamma in 0.05f64..0.97) {
        let game: Game<f64> = random_game(n, actions, gamma, seed);
        let pi = pick_profile(&game, seed);
        let pi2 = pick_profile(&game, seed ^ 0xABCD);
        let gamma = *game.gamma();

        // (I - gamma P) v = c
        let v = value_vector(&game, &pi).unwrap();
        let (p, c) = dense_rows(&game, &pi);
        for i in 0..n {
            let pv: f64 = p[i].iter().zip(&v.0).map(|(a, b)| a * b).sum();
            prop_assert!((v[i] - gamma * pv - c[i]).abs() <= 1e-10 * (1.0 + v.norm_inf()));
        }

        // Modified costs vanish on the profile's own actions.
        let reduced = modified_costs(&game, &v).unwrap();
        for &a in pi.as_slice() {
            prop_assert!(reduced[a].abs() <= 1e-10 * (1.0 + v.norm_inf()));
        }

        // Flux entries are at least one and carry total mass n / (1 - gamma).
        let x = flux_vector(&game, &pi).unwrap();
        let mass = n as f64 / (1.0 - gamma);
        prop_assert!(x.0.iter().all(|&xi| xi >= 1.0 - 1e-12));
        prop_assert!((x.0.iter().sum::<f64>() - mass).abs() <= 1e-10 * mass);

        // e^T (v' - v) = x' (c^pi)_pi'
        let v2 = value_vector(&game, &pi2).unwrap();
        let x2 = flux_vector(&game, &pi2).unwrap();
        let pairing: f64 = (0..n).map(|i| x2[i] * reduced[pi2.action(i)]).sum();
        prop_assert!((v2.sub(&v).sum() - pairing).abs() <= 1e-9 * (1.0 + v2.norm_inf() + v.norm_inf()));

        // Both routes to v_pi2 - v_pi agree.
        let direct = modified_value_vector(&game, &pi, &pi2).unwrap();
        let via_costs = modified_value_vector_via_costs(&game, &pi, &pi2).unwrap();
        prop_assert!(direct.dist_inf(&via_costs) <= 1e-9 * (1.0 + v2.norm_inf()));
    }
}
