mod common;

use common::*;
use proptest::prelude::*;
use tbsg_core::strategy_iteration::optimal_counter_strategy_from;
use tbsg_core::verification::{check_action_elimination, check_gap_lemmas};
use tbsg_core::{
    apply_t, bound_report, brute_force_solve, check_optimality, extract_profile, howard_policy_iteration,
    modified_costs, optimal_counter_strategy, strategy_iteration, value_iteration, value_vector, Game, Player,
    Rational, Scalar, SiOptions, Strategy, StrategyProfile, ValueVector,
};

fn opts() -> SiOptions {
    SiOptions::default()
}

/// Optimal value by exhaustive search over profiles, checked only through
/// the optimality condition evaluated in test code.
fn oracle_optimum(game: &Game<f64>) -> Vec<f64> {
    let mut found = None;
    for profile in all_profiles(game) {
        let v = value_vector(game, &profile).unwrap();
        let ok = game.actions().iter().all(|action| {
            let q = action.cost + game.gamma() * action.transition.iter().map(|(j, p)| p * v[*j]).sum::<f64>();
            let reduced = q - v[action.source];
            match game.owner(action.source) {
                Player::One => reduced >= -1e-9,
                Player::Two => reduced <= 1e-9,
            }
        });
        if ok {
            found = Some(v.0);
            break;
        }
    }
    found.expect("some profile is optimal")
}

#[test]
fn optimum_is_fixed_point_of_operator() {
    for seed in 0..10 {
        let game: Game<f64> = random_game(4, 2, 0.8, seed);
        let v = ValueVector(oracle_optimum(&game));
        assert!(apply_t(&game, &v).unwrap().dist_inf(&v) <= 1e-10, "seed {seed}");
    }
}

#[test]
fn value_iteration_converges_geometrically() {
    for seed in 0..10 {
        let game: Game<f64> = random_game(5, 2, 0.8, seed);
        let v_star = ValueVector(oracle_optimum(&game));
        let u0 = ValueVector::zeros(5);
        let r = value_iteration(&game, &u0, &0.0, Some(60), true).unwrap();
        let d0 = u0.dist_inf(&v_star);
        for (k, u) in r.iterates.iter().enumerate() {
            assert!(
                u.dist_inf(&v_star) <= 0.8f64.powi(k as i32) * d0 + 1e-10,
                "seed {seed} k {k}"
            );
        }
    }
}

#[test]
fn value_iteration_from_two_starts_agrees_with_oracle() {
    let game: Game<f64> = random_game(5, 3, 0.7, 99);
    let v_star = ValueVector(oracle_optimum(&game));
    let a = value_iteration(&game, &ValueVector(vec![-50.0; 5]), &0.0, Some(120), false).unwrap();
    let b = value_iteration(&game, &ValueVector(vec![80.0; 5]), &0.0, Some(120), false).unwrap();
    assert!(a.final_values.dist_inf(&b.final_values) <= 1e-9);
    assert!(a.final_values.dist_inf(&v_star) <= 1e-9);
}

#[test]
fn counter_strategy_matches_enumeration() {
    let mut checked = 0;
    for seed in 0..40 {
        let mut s = spec(3, 2, 0.9, seed);
        s.owner_rule = tbsg_core::OwnerRule::Random(0.3);
        let game: Game<f64> = tbsg_core::generate(&s).unwrap();
        let taus = all_strategies(&game, Player::Two);
        if taus.len() < 2 {
            continue;
        }
        for sigma in all_strategies(&game, Player::One) {
            let values: Vec<Vec<f64>> = taus
                .iter()
                .map(|tau| value_vector(&game, &StrategyProfile::combine(&sigma, tau)).unwrap().0)
                .collect();
            // The best response dominates every alternative in every state.
            let best: Vec<f64> = (0..3)
                .map(|i| values.iter().map(|v| v[i]).fold(f64::MIN, f64::max))
                .collect();
            let counter = optimal_counter_strategy(&game, &sigma).unwrap();
            assert!(max_abs_diff(&counter.values.0, &best) <= 1e-9, "seed {seed}");
            checked += 1;
        }
    }
    assert!(checked >= 20, "only {checked} games had a player-two choice");
}

#[test]
fn counter_strategy_with_singletons_takes_one_evaluation() {
    let game: Game<f64> = random_game(4, 1, 0.9, 5);
    let sigma = game.first_strategy(Player::One);
    let c = optimal_counter_strategy(&game, &sigma).unwrap();
    assert_eq!(c.iterations, 1);
    assert_eq!(c.strategy, game.first_strategy(Player::Two));
}

#[test]
fn warm_and_cold_starts_reach_same_values() {
    for seed in 0..20 {
        let game: Game<f64> = random_game(6, 3, 0.9, seed);
        let sigma = game.first_strategy(Player::One);
        let cold = optimal_counter_strategy(&game, &sigma).unwrap();
        let warm_start = Strategy {
            player: Player::Two,
            choice: (0..6)
                .map(|i| (game.owner(i) == Player::Two).then(|| *game.actions_at(i).last().unwrap()))
                .collect(),
        };
        let warm = optimal_counter_strategy_from(&game, &sigma, Some(&warm_start), &opts()).unwrap();
        assert!(cold.values.dist_inf(&warm.values) <= 1e-9);
    }
}

#[test]
fn strategy_iteration_matches_brute_force_float() {
    for seed in 0..30 {
        let game: Game<f64> = random_game(6, 2, 0.9, seed);
        let (profile, trace) = strategy_iteration(&game, &game.first_strategy(Player::One), &opts()).unwrap();
        let bf = brute_force_solve(&game).unwrap();
        let v = trace.final_values();
        assert!(v.dist_inf(&bf.values) <= 1e-9 * (1.0 + v.norm_inf()), "seed {seed}");
        assert!(check_optimality(&game, &profile).unwrap().optimal);
    }
}

#[test]
fn strategy_iteration_matches_brute_force_exact() {
    for seed in 0..15 {
        let game: Game<Rational> = random_game(3, 2, 0.9, seed);
        let (_, trace) = strategy_iteration(&game, &game.first_strategy(Player::One), &opts()).unwrap();
        let bf = brute_force_solve(&game).unwrap();
        assert_eq!(trace.final_values(), &bf.values, "seed {seed}");
    }
}

#[test]
fn howard_equals_strategy_iteration_on_mdps() {
    for seed in 0..20 {
        let game: Game<f64> = random_mdp(5, 3, 0.9, seed);
        let (_, si) = strategy_iteration(&game, &game.first_strategy(Player::One), &opts()).unwrap();
        let (_, howard) = howard_policy_iteration(&game, &game.first_profile(), &opts()).unwrap();
        assert_eq!(si.iterations, howard.iterations);
        for (a, b) in si.steps.iter().zip(&howard.steps) {
            assert_eq!(a.sigma, b.sigma);
            assert_eq!(a.values, b.values);
        }
    }
}

#[test]
fn howard_matches_tight_value_iteration() {
    for seed in 0..10 {
        let game: Game<f64> = random_mdp(8, 3, 0.9, seed);
        let (_, trace) = howard_policy_iteration(&game, &game.first_profile(), &opts()).unwrap();
        let vi = value_iteration(&game, &ValueVector::zeros(8), &1e-12, None, false).unwrap();
        assert!(vi.converged);
        assert!(trace.final_values().dist_inf(&vi.final_values) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn brute_force_optimal_profiles_share_values() {
    for seed in 0..10 {
        let game: Game<Rational> = random_game(3, 3, 0.5, seed);
        let bf = brute_force_solve(&game).unwrap();
        for profile in all_profiles(&game) {
            if check_optimality(&game, &profile).unwrap().optimal {
                assert_eq!(value_vector(&game, &profile).unwrap(), bf.values);
            }
        }
    }
}

#[test]
fn gap_lemmas_hold_on_traces() {
    let mut applied = 0;
    for seed in 0..40 {
        let game: Game<f64> = random_game(5, 3, 0.9, seed);
        let (_, trace) = strategy_iteration(&game, &game.first_strategy(Player::One), &opts()).unwrap();
        let optimum = trace.final_profile();
        let profiles: Vec<_> = trace.steps.iter().map(|s| s.profile()).collect();
        for k in 0..profiles.len() {
            for l in k..profiles.len() {
                let report = check_gap_lemmas(&game, &profiles[k], &profiles[l], &optimum).unwrap();
                assert!(report.all_hold(), "seed {seed} k {k} l {l}: {report:?}");
                applied += report.shared_action_lower.applied() as usize;
            }
        }
        assert_eq!(check_action_elimination(&trace, &game).unwrap().violations(), 0);
        assert!(bound_report(&trace, &game).satisfied);
    }
    assert!(applied > 0);
}

/// Small discounts make `L < 1`, so windows open inside short traces and
/// the elimination check has to produce real witnesses.
#[test]
fn action_elimination_witnesses_with_short_horizons() {
    use tbsg_core::verification::{iteration_bound, Elimination};
    let mut witnesses = 0;
    for seed in 0..60 {
        let gamma = [0.05, 0.1, 0.2][seed as usize % 3];
        let n = 2 + seed as usize % 3;
        let game: Game<f64> = random_game(n, 3, gamma, 500 + seed);
        let (_, trace) = strategy_iteration(&game, &game.first_strategy(Player::One), &opts()).unwrap();
        let report = check_action_elimination(&trace, &game).unwrap();
        assert_eq!(report.violations(), 0, "seed {seed}");
        let (l, _) = iteration_bound(game.n(), game.m(), gamma);
        let sigmas = trace.sigmas();
        for (k, e) in report.per_step.iter().enumerate() {
            if let Elimination::Witness(a) = e {
                // Recheck the witness directly against the trace.
                let state = game.action(*a).source;
                assert_eq!(sigmas[k].get(state), Some(*a));
                for (ell, sigma) in sigmas.iter().enumerate() {
                    if ell as f64 > k as f64 + l {
                        assert_ne!(sigma.get(state), Some(*a), "seed {seed} k {k} l {ell}");
                    }
                }
                witnesses += 1;
            }
        }
    }
    assert!(witnesses > 0);
}

fn traced_invariants(game: &Game<f64>) {
    let (_, trace) = strategy_iteration(game, &game.first_strategy(Player::One), &opts()).unwrap();
    let gamma = *game.gamma();
    let v_star = trace.final_values().clone();
    let d0 = trace.steps[0].values.dist_inf(&v_star);
    let vi = value_iteration(game, &trace.steps[0].values, &0.0, Some(trace.iterations), true).unwrap();
    let mut seen = std::collections::HashSet::new();
    for (k, step) in trace.steps.iter().enumerate() {
        let v = &step.values;
        let slack = 1e-9 * (1.0 + v.norm_inf());
        assert!(seen.insert(step.profile()), "profile repeated");
        // Geometric convergence.
        assert!(v.dist_inf(&v_star) <= gamma.powi(k as i32) * d0 * (1.0 + 1e-9) + 1e-12);
        // Dominated by value iteration started from v^0.
        assert!(v.le_within(&vi.iterates[k], &slack));
        // Best response: player-two modified costs are nonpositive.
        let reduced = modified_costs(game, v).unwrap();
        for i in game.states_of(Player::Two) {
            for &a in game.actions_at(i) {
                assert!(reduced[a] <= slack);
            }
        }
        if let Some(next) = trace.steps.get(k + 1) {
            // Strict improvement somewhere, no deterioration.
            assert!(next.values.le_within(v, &slack));
            assert!(next.values.0.iter().zip(&v.0).any(|(a, b)| a < b));
            // Every switch is profitable.
            for i in game.states_of(Player::One) {
                let (old, new) = (step.sigma.get(i).unwrap(), next.sigma.get(i).unwrap());
                if old != new {
                    assert!(reduced[new] < 0.0);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_contracts_and_is_monotone(
        seed in any::<u64>(),
        u in proptest::collection::vec(-100.0f64..100.0, 5),
        delta in proptest::collection::vec(0.0f64..50.0, 5),
        w in proptest::collection::vec(-100.0f64..100.0, 5),
    ) {
        let game: Game<f64> = random_game(5, 3, 0.9, seed);
        let (u, w) = (ValueVector(u), ValueVector(w));
        let tu = apply_t(&game, &u).unwrap();
        let tw = apply_t(&game, &w).unwrap();
        prop_assert!(tu.dist_inf(&tw) <= 0.9 * u.dist_inf(&w) + 1e-12);

        let above = ValueVector(u.0.iter().zip(&delta).map(|(a, d)| a + d).collect());
        prop_assert!(tu.le_within(&apply_t(&game, &above).unwrap(), &0.0));

        // Extraction picks a minimizer / maximizer and reproduces T.
        let profile = extract_profile(&game, &u, None).unwrap();
        let q = game.lookahead_all(&u.0);
        for i in 0..5 {
            let chosen = q[profile.action(i)];
            prop_assert_eq!(chosen, tu[i]);
            for &a in game.actions_at(i) {
                match game.owner(i) {
                    Player::One => prop_assert!(chosen <= q[a]),
                    Player::Two => prop_assert!(chosen >= q[a]),
                }
            }
        }
    }

    #[test]
    fn strategy_iteration_trace_invariants(seed in any::<u64>(), n in 2usize..8, actions in 1usize..4) {
        traced_invariants(&random_game::<f64>(n, actions, 0.9, seed));
    }

    #[test]
    fn exact_strategy_iteration_is_optimal(seed in any::<u64>()) {
        let game: Game<Rational> = random_game(4, 2, 0.75, seed);
        let (profile, trace) = strategy_iteration(&game, &game.first_strategy(Player::One), &opts()).unwrap();
        prop_assert!(trace.terminated_optimal);
        let check = check_optimality(&game, &profile).unwrap();
        let signs_ok = check.modified.0.iter().enumerate().all(|(a, c)| match game.owner(game.action(a).source) {
            Player::One => *c >= Rational::from_i64(0),
            Player::Two => *c <= Rational::from_i64(0),
        });
        prop_assert!(signs_ok);
    }
}
