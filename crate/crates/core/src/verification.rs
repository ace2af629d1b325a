//! Certificates and empirical checks: the optimality condition, an
//! exhaustive oracle, the flux/modified-cost identities, the value-gap
//! inequalities, action elimination along strategy iteration traces, and the
//! iteration bound `(m + 1)(1 + log_{1/gamma}(n^2 / (1 - gamma)))`.

use std::fmt;

use thiserror::Error;

use crate::evaluation::{
    flux_pairing, flux_vector, modified_costs, value_vector, EvalError, ModifiedCostVector, ValueVector,
};
use crate::game::{Game, Player, StrategyProfile};
use crate::scalar::Scalar;
use crate::strategy_iteration::SiTrace;

/// Relative slack `tol * (1 + ‖v‖_∞)` under which a floating point
/// modified cost counts as zero.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-9;
/// Absolute residual allowed for identity checks in floating point mode.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Largest number of profiles [`brute_force_solve`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug)]
pub struct OptimalityCheck<T = f64> {
    pub optimal: bool,
    /// Action whose modified cost has the wrong sign, i.e. a profitable switch.
    pub witness: Option<usize>,
    pub values: ValueVector<T>,
    pub modified: ModifiedCostVector<T>,
}

/// A profile is optimal iff its modified costs are nonnegative on every
/// player-one action and nonpositive on every player-two action.
pub fn check_optimality<T: Scalar>(game: &Game<T>, profile: &StrategyProfile) -> Result<OptimalityCheck<T>, EvalError> {
    let values = value_vector(game, profile)?;
    let modified = modified_costs(game, &values)?;
    let slack = T::slack(OPTIMALITY_TOLERANCE, &values.norm_inf());
    let mut witness: Option<(usize, T)> = None;
    for (id, action) in game.actions().iter().enumerate() {
        let excess = match game.owner(action.source) {
            Player::One => -modified[id].clone(),
            Player::Two => modified[id].clone(),
        };
        if excess > slack && witness.as_ref().is_none_or(|(_, worst)| excess > *worst) {
            witness = Some((id, excess));
        }
    }
    Ok(OptimalityCheck {
        optimal: witness.is_none(),
        witness: witness.map(|(id, _)| id),
        values,
        modified,
    })
}

#[derive(Debug, Error)]
pub enum BruteForceError {
    #[error("{profiles} profiles exceed the enumeration limit of {limit}")]
    TooLarge { profiles: u128, limit: u128 },
    #[error("no profile satisfies the optimality condition (tolerance pathology)")]
    NoOptimalProfile,
    #[error("optimal profiles disagree on the value vector (distance {distance})")]
    ValueMismatch { distance: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct BruteForceSolution<T = f64> {
    pub profile: StrategyProfile,
    pub values: ValueVector<T>,
    /// Number of profiles passing the optimality condition.
    pub optimal_profiles: usize,
    pub enumerated: usize,
}

/// Enumerates every profile (state 0 varying fastest) and returns the first
/// one passing [`check_optimality`], after confirming all passing profiles
/// share a single value vector.
pub fn brute_force_solve<T: Scalar>(game: &Game<T>) -> Result<BruteForceSolution<T>, BruteForceError> {
    let profiles = game.profile_count();
    if profiles > BRUTE_FORCE_LIMIT {
        return Err(BruteForceError::TooLarge {
            profiles,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let n = game.n();
    let mut digits = vec![0usize; n];
    let mut best: Option<(StrategyProfile, ValueVector<T>)> = None;
    let mut optimal_profiles = 0;
    let mut enumerated = 0;
    loop {
        let profile = StrategyProfile((0..n).map(|i| game.actions_at(i)[digits[i]]).collect());
        enumerated += 1;
        let check = check_optimality(game, &profile)?;
        if check.optimal {
            optimal_profiles += 1;
            match &best {
                None => best = Some((profile, check.values)),
                Some((_, values)) => {
                    let distance = values.dist_inf(&check.values);
                    if distance > T::slack(OPTIMALITY_TOLERANCE, &values.norm_inf()) {
                        return Err(BruteForceError::ValueMismatch {
                            distance: distance.to_f64(),
                        });
                    }
                }
            }
        }
        // Mixed-radix increment.
        let mut i = 0;
        while i < n {
            digits[i] += 1;
            if digits[i] < game.actions_at(i).len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    let (profile, values) = best.ok_or(BruteForceError::NoOptimalProfile)?;
    Ok(BruteForceSolution {
        profile,
        values,
        optimal_profiles,
        enumerated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Identity {
    /// `(c^pi)_pi = 0`
    ZeroOnProfile,
    /// `x_pi e = n / (1 - gamma)`
    FluxMass,
    /// `e^T v_pi = x_pi c_pi`
    CostPairing,
    /// `e^T (v_pi' - v_pi) = x_pi' (c^pi)_pi'`
    GapPairing,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::ZeroOnProfile => "zero_on_profile",
            Identity::FluxMass => "flux_mass",
            Identity::CostPairing => "cost_pairing",
            Identity::GapPairing => "gap_pairing",
        })
    }
}

#[derive(Clone, Debug)]
pub struct IdentityResidual<T = f64> {
    pub identity: Identity,
    pub residual: T,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct IdentityReport<T = f64> {
    pub residuals: Vec<IdentityResidual<T>>,
}

impl<T: Scalar> IdentityReport<T> {
    pub fn all_hold(&self) -> bool {
        self.residuals.iter().all(|r| r.holds)
    }

    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .fold(T::zero(), |acc, r| acc.max_of(r.residual.clone()))
    }
}

fn total<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

/// Evaluates the four flux / modified-cost identities for `pi` and `pi_prime`.
pub fn check_identities<T: Scalar>(
    game: &Game<T>,
    pi: &StrategyProfile,
    pi_prime: &StrategyProfile,
) -> Result<IdentityReport<T>, EvalError> {
    let v = value_vector(game, pi)?;
    let v_prime = value_vector(game, pi_prime)?;
    let reduced = modified_costs(game, &v)?;
    let flux = flux_vector(game, pi)?;
    let flux_prime = flux_vector(game, pi_prime)?;
    let costs: Vec<T> = game.actions().iter().map(|a| a.cost.clone()).collect();
    let n = T::from_i64(game.n() as i64);
    let mass = n / (T::one() - game.gamma().clone());

    let zero_on_profile = pi
        .as_slice()
        .iter()
        .fold(T::zero(), |acc, &a| acc.max_of(reduced[a].abs()));
    let flux_mass = (total(&flux.0) - mass).abs();
    let cost_pairing = (v.sum() - flux_pairing(&flux, pi, &costs)).abs();
    let gap_pairing = (v_prime.sub(&v).sum() - flux_pairing(&flux_prime, pi_prime, &reduced.0)).abs();

    let tolerance = T::slack(IDENTITY_TOLERANCE, &T::zero());
    let residuals = [
        (Identity::ZeroOnProfile, zero_on_profile),
        (Identity::FluxMass, flux_mass),
        (Identity::CostPairing, cost_pairing),
        (Identity::GapPairing, gap_pairing),
    ]
    .into_iter()
    .map(|(identity, residual)| IdentityResidual {
        identity,
        holds: residual <= tolerance,
        residual,
    })
    .collect();
    Ok(IdentityReport { residuals })
}

#[derive(Clone, Debug, PartialEq)]
pub enum LemmaOutcome<T = f64> {
    /// The inequality `lhs <= rhs` (or `>=`, per lemma) holds.
    Holds {
        lhs: T,
        rhs: T,
    },
    Fails {
        lhs: T,
        rhs: T,
    },
    /// Preconditions not met; the lemma says nothing.
    Skipped(&'static str),
}

impl<T> LemmaOutcome<T> {
    pub fn failed(&self) -> bool {
        matches!(self, LemmaOutcome::Fails { .. })
    }

    pub fn applied(&self) -> bool {
        !matches!(self, LemmaOutcome::Skipped(_))
    }
}

/// Results of the three value-gap inequalities for profiles
/// `pi2`, `pi1`, `pi0` with `v_pi2 >= v_pi1 >= v_pi0`.
#[derive(Clone, Debug)]
pub struct GapLemmaReport<T = f64> {
    /// `(v_pi1 - v_pi0)_i >= (c^pi0)_{pi1(i)}` for every state `i`; lhs/rhs
    /// are the tightest state's two sides.
    pub pointwise_gap: LemmaOutcome<T>,
    /// `‖v_pi2 - v_pi0‖_1 <= n/(1-gamma) * max_{pi2} c^pi0`.
    pub total_gap_upper: LemmaOutcome<T>,
    /// `‖v_pi1 - v_pi0‖_1 >= (1-gamma)/n * ‖v_pi2 - v_pi0‖_1` when the
    /// maximizing action of `pi2` also belongs to `pi1`.
    pub shared_action_lower: LemmaOutcome<T>,
}

impl<T> GapLemmaReport<T> {
    pub fn all_hold(&self) -> bool {
        !self.pointwise_gap.failed() && !self.total_gap_upper.failed() && !self.shared_action_lower.failed()
    }
}

fn outcome<T: Scalar>(holds: bool, lhs: T, rhs: T) -> LemmaOutcome<T> {
    if holds {
        LemmaOutcome::Holds { lhs, rhs }
    } else {
        LemmaOutcome::Fails { lhs, rhs }
    }
}

fn norm_one<T: Scalar>(v: &ValueVector<T>) -> T {
    v.0.iter().fold(T::zero(), |acc, x| acc + x.abs())
}

pub fn check_gap_lemmas<T: Scalar>(
    game: &Game<T>,
    pi2: &StrategyProfile,
    pi1: &StrategyProfile,
    pi0: &StrategyProfile,
) -> Result<GapLemmaReport<T>, EvalError> {
    let v2 = value_vector(game, pi2)?;
    let v1 = value_vector(game, pi1)?;
    let v0 = value_vector(game, pi0)?;
    let reduced = modified_costs(game, &v0)?;
    let scale = v2.norm_inf().max_of(v1.norm_inf()).max_of(v0.norm_inf());
    let slack = T::slack(OPTIMALITY_TOLERANCE, &scale);
    let n = T::from_i64(game.n() as i64);
    let one_minus_gamma = T::one() - game.gamma().clone();

    let v1_ge_v0 = v0.le_within(&v1, &slack);
    let v2_ge_v0 = v0.le_within(&v2, &slack);
    let v2_ge_v1 = v1.le_within(&v2, &slack);

    let pointwise_gap = if v1_ge_v0 {
        // Report the state with the smallest margin.
        let (lhs, rhs) = (0..game.n())
            .map(|i| (v1[i].clone() - v0[i].clone(), reduced[pi1.action(i)].clone()))
            .min_by(|(l1, r1), (l2, r2)| {
                (l1.clone() - r1.clone())
                    .partial_cmp(&(l2.clone() - r2.clone()))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("at least one state");
        outcome(lhs.clone() + slack.clone() >= rhs, lhs, rhs)
    } else {
        LemmaOutcome::Skipped("v_pi1 >= v_pi0 does not hold")
    };

    // Maximizers of c^pi0 over the actions of pi2.
    let max_reduced = pi2
        .as_slice()
        .iter()
        .map(|&a| reduced[a].clone())
        .fold(None, |acc: Option<T>, x| Some(acc.map_or(x.clone(), |m| m.max_of(x))))
        .expect("at least one state");
    let maximizers: Vec<usize> = pi2
        .as_slice()
        .iter()
        .copied()
        .filter(|&a| reduced[a] == max_reduced)
        .collect();
    let gap2 = norm_one(&v2.sub(&v0));

    let total_gap_upper = if v2_ge_v0 {
        let rhs = n.clone() / one_minus_gamma.clone() * max_reduced.clone();
        outcome(
            gap2.clone() <= rhs.clone() + slack.clone() * n.clone(),
            gap2.clone(),
            rhs,
        )
    } else {
        LemmaOutcome::Skipped("v_pi2 >= v_pi0 does not hold")
    };

    let shared = maximizers.iter().any(|&a| pi1.action(game.action(a).source) == a);
    let shared_action_lower = if !(v2_ge_v1 && v1_ge_v0) {
        LemmaOutcome::Skipped("v_pi2 >= v_pi1 >= v_pi0 does not hold")
    } else if !shared {
        LemmaOutcome::Skipped("maximizing action of pi2 is not in pi1")
    } else {
        let lhs = norm_one(&v1.sub(&v0));
        let rhs = one_minus_gamma / n.clone() * gap2;
        outcome(lhs.clone() + slack * n >= rhs, lhs, rhs)
    };

    Ok(GapLemmaReport {
        pointwise_gap,
        total_gap_upper,
        shared_action_lower,
    })
}

/// `L = ln(n^2 / (1 - gamma)) / ln(1 / gamma)` and the bound `(m + 1)(1 + L)`.
pub fn iteration_bound(n: usize, m: usize, gamma: f64) -> (f64, f64) {
    let l = ((n * n) as f64 / (1.0 - gamma)).ln() / (1.0 / gamma).ln();
    (l, (m as f64 + 1.0) * (1.0 + l))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub l: f64,
    pub theoretical_bound: f64,
    pub observed_iterations: usize,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn ratio(&self) -> f64 {
        self.observed_iterations as f64 / self.theoretical_bound
    }
}

pub fn bound_report<T: Scalar>(trace: &SiTrace<T>, game: &Game<T>) -> BoundReport {
    let gamma = game.gamma().to_f64();
    let (l, theoretical_bound) = iteration_bound(game.n(), game.m(), gamma);
    BoundReport {
        n: game.n(),
        m: game.m(),
        gamma,
        l,
        theoretical_bound,
        observed_iterations: trace.iterations,
        satisfied: (trace.iterations as f64) <= theoretical_bound,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Elimination {
    /// No `sigma^l` with `k + L < l <= N`.
    EmptyWindow,
    /// `sigma^k` already has the optimal value; the lemma's argument is void.
    AlreadyOptimal,
    /// This action of `sigma^k` never appears after the window opens.
    Witness(usize),
    /// Every action of `sigma^k` reappears later.
    Violation,
}

#[derive(Clone, Debug)]
pub struct EliminationReport {
    pub l: f64,
    /// One entry per `k = 0..=N`.
    pub per_step: Vec<Elimination>,
}

impl EliminationReport {
    pub fn violations(&self) -> usize {
        self.per_step.iter().filter(|e| **e == Elimination::Violation).count()
    }

    pub fn witnesses(&self) -> usize {
        self.per_step
            .iter()
            .filter(|e| matches!(e, Elimination::Witness(_)))
            .count()
    }
}

/// For every `k`, looks for an action of `sigma^k` absent from all
/// `sigma^l` with `k + L < l <= N`.
pub fn check_action_elimination<T: Scalar>(trace: &SiTrace<T>, game: &Game<T>) -> Result<EliminationReport, EvalError> {
    let (l, _) = iteration_bound(game.n(), game.m(), game.gamma().to_f64());
    let sigmas = trace.sigmas();
    let last = sigmas.len() - 1;
    let optimal_values = trace.final_values();
    let reduced = modified_costs(game, optimal_values)?;
    let slack = T::slack(OPTIMALITY_TOLERANCE, &optimal_values.norm_inf());

    let mut per_step = Vec::with_capacity(sigmas.len());
    for k in 0..=last {
        let first = (k as f64 + l).floor() as usize + 1;
        if first > last {
            per_step.push(Elimination::EmptyWindow);
            continue;
        }
        let step = &trace.steps[k.min(trace.steps.len() - 1)];
        if step.values.dist_inf(optimal_values) <= slack {
            per_step.push(Elimination::AlreadyOptimal);
            continue;
        }
        let later = &sigmas[first..=last];
        let absent: Vec<usize> = sigmas[k]
            .actions()
            .filter(|&a| later.iter().all(|s| s.get(game.action(a).source) != Some(a)))
            .collect();
        if absent.is_empty() {
            per_step.push(Elimination::Violation);
            continue;
        }
        // Prefer the action singled out by the argument: the largest
        // modified cost relative to the final profile.
        let witness = absent
            .iter()
            .copied()
            .max_by(|&a, &b| {
                reduced[a]
                    .partial_cmp(&reduced[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(&a))
            })
            .expect("nonempty");
        per_step.push(Elimination::Witness(witness));
    }
    Ok(EliminationReport { l, per_step })
}
