//! Seeded instance generation.
//!
//! Randomness comes from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Bounded integers are drawn as
//! `x % bound` after rejecting `x < 2^64 mod bound`, so the stream of
//! instances is fully determined by the seed on every platform.
//!
//! Draw order, per state `i` in increasing order:
//! 1. the owner (only for `OwnerRule::Random`: a uniform `[0, 1)` draw
//!    below `p` gives player 1),
//! 2. the number of actions,
//! 3. per action: the cost, the support size, the support (partial
//!    Fisher-Yates over `0..n`, then sorted), and one weight in `[1, 1000]`
//!    per support state.
//!
//! Costs are multiples of 0.001. Probabilities are the weights normalized
//! and truncated to nine decimal places, with the rounding remainder given
//! to the heaviest state, so every row sums to exactly one as a decimal and
//! the same instance can be loaded in floating point or exact mode.

use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::game::{Action, Game, Player};
use crate::scalar::{fixed_decimal, Scalar};

const PROBABILITY_PLACES: usize = 9;
const PROBABILITY_UNIT: u64 = 1_000_000_000;
const COST_UNIT: f64 = 1000.0;
const MAX_WEIGHT: u64 = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("unknown family {0:?} (expected chain, complete or mdp-grid)")]
    UnknownFamily(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OwnerRule {
    /// Even states to player 1, odd states to player 2.
    Alternate,
    /// Each state goes to player 1 with probability `p`.
    Random(f64),
    /// Every state to player 1.
    Mdp,
}

impl fmt::Display for OwnerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OwnerRule::Alternate => f.write_str("alternate"),
            OwnerRule::Random(p) => write!(f, "random:{p}"),
            OwnerRule::Mdp => f.write_str("mdp"),
        }
    }
}

impl FromStr for OwnerRule {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alternate" => Ok(OwnerRule::Alternate),
            "mdp" => Ok(OwnerRule::Mdp),
            _ => s
                .strip_prefix("random:")
                .and_then(|p| p.parse().ok())
                .map(OwnerRule::Random)
                .ok_or_else(|| GenError::InvalidSpec(format!("unknown owner rule {s:?}"))),
        }
    }
}

/// Inclusive integer range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn exactly(k: usize) -> Self {
        Span { lo: k, hi: k }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

impl FromStr for Span {
    type Err = GenError;

    /// `"3"` or `"2..4"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenError::InvalidSpec(format!("bad range {s:?}"));
        match s.split_once("..") {
            Some((lo, hi)) => Ok(Span {
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
            }),
            None => s.trim().parse().map(Span::exactly).map_err(|_| bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub actions_per_state: Span,
    pub support_size: Span,
    pub owner_rule: OwnerRule,
    pub gamma: f64,
    pub cost_range: (f64, f64),
    pub seed: u64,
}

impl GenSpec {
    /// Two players alternating, full-size supports up to 3 states, costs in `[0, 10]`.
    pub fn new(n: usize, actions_per_state: usize, gamma: f64, seed: u64) -> Self {
        GenSpec {
            n,
            actions_per_state: Span::exactly(actions_per_state),
            support_size: Span {
                lo: 1,
                hi: n.clamp(1, 3),
            },
            owner_rule: OwnerRule::Alternate,
            gamma,
            cost_range: (0.0, 10.0),
            seed,
        }
    }

    fn cost_units(&self) -> (i64, i64) {
        let lo = (self.cost_range.0 * COST_UNIT).ceil() as i64;
        let hi = (self.cost_range.1 * COST_UNIT).floor() as i64;
        (lo, hi)
    }

    pub fn check(&self) -> Result<(), GenError> {
        let fail = |msg: String| Err(GenError::InvalidSpec(msg));
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if self.actions_per_state.lo == 0 || self.actions_per_state.lo > self.actions_per_state.hi {
            return fail(format!("bad actions per state {}", self.actions_per_state));
        }
        if self.support_size.lo == 0 || self.support_size.lo > self.support_size.hi {
            return fail(format!("bad support size {}", self.support_size));
        }
        if self.support_size.hi > self.n {
            return fail(format!("support size {} exceeds n = {}", self.support_size, self.n));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail(format!("gamma out of range: {}", self.gamma));
        }
        if let OwnerRule::Random(p) = self.owner_rule {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("owner probability {p} outside [0, 1]"));
            }
        }
        let (lo, hi) = self.cost_units();
        if !(self.cost_range.0.is_finite() && self.cost_range.1.is_finite()) || lo > hi {
            return fail(format!(
                "cost range [{}, {}] contains no multiple of 0.001",
                self.cost_range.0, self.cost_range.1
            ));
        }
        Ok(())
    }
}

struct Draw(Xoshiro256StarStar);

impl Draw {
    fn new(seed: u64) -> Self {
        Draw(Xoshiro256StarStar::seed_from_u64(seed))
    }

    /// Uniform in `0..bound`.
    fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.0.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    fn span(&mut self, span: Span) -> usize {
        span.lo + self.below((span.hi - span.lo + 1) as u64) as usize
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn decimal<T: Scalar>(text: &str) -> T {
    T::parse_decimal(text).expect("generated decimal parses")
}

/// Normalizes weights into nine-decimal probabilities summing exactly to one.
fn quantized_probabilities(weights: &[u64]) -> Vec<String> {
    let total: u64 = weights.iter().sum();
    let mut units: Vec<u64> = weights.iter().map(|w| w * PROBABILITY_UNIT / total).collect();
    let remainder = PROBABILITY_UNIT - units.iter().sum::<u64>();
    let heaviest = (0..weights.len())
        .max_by_key(|&j| (weights[j], std::cmp::Reverse(j)))
        .unwrap_or(0);
    units[heaviest] += remainder;
    units
        .iter()
        .map(|&u| fixed_decimal(u as i64, PROBABILITY_PLACES))
        .collect()
}

fn random_transition<T: Scalar>(draw: &mut Draw, n: usize, support: usize) -> Vec<(usize, T)> {
    let mut pool: Vec<usize> = (0..n).collect();
    for j in 0..support {
        let r = j + draw.below((n - j) as u64) as usize;
        pool.swap(j, r);
    }
    let mut targets = pool[..support].to_vec();
    targets.sort_unstable();
    let weights: Vec<u64> = targets.iter().map(|_| 1 + draw.below(MAX_WEIGHT)).collect();
    targets
        .into_iter()
        .zip(quantized_probabilities(&weights))
        .map(|(j, p)| (j, decimal(&p)))
        .collect()
}

/// Builds the game described by `spec`; a pure function of the spec.
pub fn generate<T: Scalar>(spec: &GenSpec) -> Result<Game<T>, GenError> {
    spec.check()?;
    let mut draw = Draw::new(spec.seed);
    let (cost_lo, cost_hi) = spec.cost_units();
    let mut owner = Vec::with_capacity(spec.n);
    let mut actions = Vec::new();
    for i in 0..spec.n {
        owner.push(match spec.owner_rule {
            OwnerRule::Alternate if i % 2 == 1 => Player::Two,
            OwnerRule::Alternate | OwnerRule::Mdp => Player::One,
            OwnerRule::Random(p) => {
                if draw.unit() < p {
                    Player::One
                } else {
                    Player::Two
                }
            }
        });
        let k = draw.span(spec.actions_per_state);
        for _ in 0..k {
            let cost = cost_lo + draw.below((cost_hi - cost_lo + 1) as u64) as i64;
            let support = draw.span(spec.support_size);
            let transition = random_transition(&mut draw, spec.n, support);
            actions.push(Action::new(i, decimal(&fixed_decimal(cost, 3)), transition));
        }
    }
    let gamma = decimal(&spec.gamma.to_decimal());
    Game::new(spec.n, gamma, owner, actions).map_err(|e| GenError::InvalidSpec(e.to_string()))
}

/// Parameters shared by the structured families; each family reads the
/// fields it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams {
    pub n: usize,
    pub actions_per_state: usize,
    pub rows: usize,
    pub cols: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            n: 4,
            actions_per_state: 2,
            rows: 3,
            cols: 3,
            gamma: 0.9,
            seed: 0,
        }
    }
}

/// Structured instance families:
///
/// * `chain`: `n` states with alternating owners. Every state but the last
///   has a cautious action (stay 3/4, advance 1/4, cost 1) and a bold one
///   (stay 1/4, advance 3/4, cost 2); the last state is a cost-0 self-loop.
/// * `complete`: `n` states with alternating owners, `actions_per_state`
///   actions each, every action supported on all states, weights and
///   costs drawn from `seed` as in [`generate`].
/// * `mdp-grid`: a `rows x cols` grid owned by player 1. Each cell has one
///   action per in-grid neighbour (north, south, west, east) reaching it
///   with probability 0.8 and staying put otherwise, at cost 1. The last
///   cell is an absorbing cost-0 goal.
pub fn family<T: Scalar>(name: &str, params: &FamilyParams) -> Result<Game<T>, GenError> {
    if !(params.gamma > 0.0 && params.gamma < 1.0) {
        return Err(GenError::InvalidSpec(format!("gamma out of range: {}", params.gamma)));
    }
    let gamma: T = decimal(&params.gamma.to_decimal());
    let game = match name {
        "chain" => chain(params.n, gamma),
        "complete" => complete(params, gamma),
        "mdp-grid" => grid(params.rows, params.cols, gamma),
        other => return Err(GenError::UnknownFamily(other.to_string())),
    }?;
    Ok(game)
}

fn build<T: Scalar>(n: usize, gamma: T, owner: Vec<Player>, actions: Vec<Action<T>>) -> Result<Game<T>, GenError> {
    Game::new(n, gamma, owner, actions).map_err(|e| GenError::InvalidSpec(e.to_string()))
}

fn alternate(n: usize) -> Vec<Player> {
    (0..n)
        .map(|i| if i % 2 == 0 { Player::One } else { Player::Two })
        .collect()
}

fn chain<T: Scalar>(n: usize, gamma: T) -> Result<Game<T>, GenError> {
    if n == 0 {
        return Err(GenError::InvalidSpec("chain needs at least one state".into()));
    }
    let p = |text: &str| decimal::<T>(text);
    let mut actions = Vec::new();
    for i in 0..n - 1 {
        actions.push(Action::new(i, p("1"), vec![(i, p("0.75")), (i + 1, p("0.25"))]));
        actions.push(Action::new(i, p("2"), vec![(i, p("0.25")), (i + 1, p("0.75"))]));
    }
    actions.push(Action::new(n - 1, p("0"), vec![(n - 1, p("1"))]));
    build(n, gamma, alternate(n), actions)
}

fn complete<T: Scalar>(params: &FamilyParams, gamma: T) -> Result<Game<T>, GenError> {
    let n = params.n;
    if n == 0 || params.actions_per_state == 0 {
        return Err(GenError::InvalidSpec(
            "complete needs n >= 1 and at least one action".into(),
        ));
    }
    let mut draw = Draw::new(params.seed);
    let mut actions = Vec::new();
    for i in 0..n {
        for _ in 0..params.actions_per_state {
            let cost = draw.below(10_001) as i64;
            let weights: Vec<u64> = (0..n).map(|_| 1 + draw.below(MAX_WEIGHT)).collect();
            let transition = quantized_probabilities(&weights)
                .iter()
                .enumerate()
                .map(|(j, text)| (j, decimal(text)))
                .collect();
            actions.push(Action::new(i, decimal(&fixed_decimal(cost, 3)), transition));
        }
    }
    build(n, gamma, alternate(n), actions)
}

fn grid<T: Scalar>(rows: usize, cols: usize, gamma: T) -> Result<Game<T>, GenError> {
    if rows == 0 || cols == 0 {
        return Err(GenError::InvalidSpec("grid needs at least one row and column".into()));
    }
    let n = rows * cols;
    let p = |text: &str| decimal::<T>(text);
    let mut actions = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let here = r * cols + c;
            if here == n - 1 {
                actions.push(Action::new(here, p("0"), vec![(here, p("1"))]));
                continue;
            }
            let neighbours = [
                (r > 0).then(|| here - cols),
                (r + 1 < rows).then(|| here + cols),
                (c > 0).then(|| here - 1),
                (c + 1 < cols).then(|| here + 1),
            ];
            for target in neighbours.into_iter().flatten() {
                let mut transition = vec![(here, p("0.2")), (target, p("0.8"))];
                transition.sort_by_key(|(j, _)| *j);
                actions.push(Action::new(here, p("1"), transition));
            }
        }
    }
    build(n, gamma, vec![Player::One; n], actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_game;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    #[test]
    fn forced_structure_is_self_loop() {
        let spec = GenSpec {
            n: 1,
            actions_per_state: Span::exactly(1),
            support_size: Span::exactly(1),
            owner_rule: OwnerRule::Mdp,
            gamma: 0.5,
            cost_range: (1.0, 1.0),
            seed: 7,
        };
        let g: Game<f64> = generate(&spec).unwrap();
        let expected = Game::new(1, 0.5, vec![Player::One], vec![Action::new(0, 1.0, vec![(0, 1.0)])]).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn same_spec_same_bytes() {
        let spec = GenSpec::new(6, 3, 0.9, 42);
        let a = serialize_game(&generate::<f64>(&spec).unwrap());
        let b = serialize_game(&generate::<f64>(&spec).unwrap());
        assert_eq!(a, b);
        // Both backends see the same instance.
        assert_eq!(serialize_game(&generate::<Rational>(&spec).unwrap()), a);
    }

    #[test]
    fn structural_count() {
        let mut spec = GenSpec::new(5, 3, 0.9, 42);
        spec.support_size = Span::exactly(2);
        let g: Game<f64> = generate(&spec).unwrap();
        assert!(g.validate().is_empty());
        assert_eq!(g.profile_count(), 243);
        assert!(g.actions().iter().all(|a| a.transition.len() == 2));
        assert_eq!(g.owner(1), Player::Two);
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let mut spec = GenSpec::new(2, 2, 0.9, 0);
        spec.support_size = Span::exactly(3);
        assert!(matches!(generate::<f64>(&spec), Err(GenError::InvalidSpec(_))));
        let spec = GenSpec::new(2, 2, 1.0, 0);
        let err = generate::<f64>(&spec).unwrap_err();
        assert!(err.to_string().contains("gamma out of range"));
        let mut spec = GenSpec::new(2, 2, 0.5, 0);
        spec.cost_range = (3.0, 1.0);
        assert!(generate::<f64>(&spec).is_err());
    }

    #[test]
    fn probabilities_sum_to_one_exactly() {
        let p = quantized_probabilities(&[1, 1, 1]);
        assert_eq!(p, vec!["0.333333334", "0.333333333", "0.333333333"]);
        let total: Rational = p.iter().map(|s| Rational::parse_decimal(s).unwrap()).sum();
        assert_eq!(total, Rational::from_i64(1));
    }

    #[test]
    fn families() {
        let chain: Game<f64> = family(
            "chain",
            &FamilyParams {
                n: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(chain.n(), 3);
        assert_eq!(chain.actions_at(2).len(), 1);
        assert_eq!(chain.action(chain.actions_at(2)[0]).transition, vec![(2, 1.0)]);
        for &a in chain.actions_at(0) {
            let targets: Vec<usize> = chain.action(a).transition.iter().map(|(j, _)| *j).collect();
            assert_eq!(targets, vec![0, 1]);
        }

        let complete: Game<f64> = family(
            "complete",
            &FamilyParams {
                n: 2,
                actions_per_state: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(complete.m(), 4);
        assert!(complete.actions().iter().all(|a| a.transition.len() == 2));

        let grid: Game<f64> = family(
            "mdp-grid",
            &FamilyParams {
                rows: 3,
                cols: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(grid.n(), 9);
        assert_eq!(grid.mdp_player(), Some(Player::One));

        assert_eq!(
            family::<f64>("ladder", &FamilyParams::default()).unwrap_err(),
            GenError::UnknownFamily("ladder".into())
        );
    }

    #[test]
    fn parses_cli_forms() {
        assert_eq!("2..4".parse::<Span>().unwrap(), Span { lo: 2, hi: 4 });
        assert_eq!("3".parse::<Span>().unwrap(), Span::exactly(3));
        assert_eq!("random:0.25".parse::<OwnerRule>().unwrap(), OwnerRule::Random(0.25));
        assert!("sometimes".parse::<OwnerRule>().is_err());
    }

    proptest! {
        #[test]
        fn generated_games_are_valid(
            n in 1usize..9,
            actions in 1usize..4,
            seed in any::<u64>(),
            owners in prop_oneof![Just(OwnerRule::Alternate), Just(OwnerRule::Mdp), Just(OwnerRule::Random(0.5))],
        ) {
            let spec = GenSpec {
                n,
                actions_per_state: Span { lo: 1, hi: actions },
                support_size: Span { lo: 1, hi: n },
                owner_rule: owners,
                gamma: 0.95,
                cost_range: (-5.0, 5.0),
                seed,
            };
            let exact: Game<Rational> = generate(&spec).unwrap();
            prop_assert!(exact.validate().is_empty());
            let float: Game<f64> = generate(&spec).unwrap();
            prop_assert!(float.validate().is_empty());
        }
    }
}
