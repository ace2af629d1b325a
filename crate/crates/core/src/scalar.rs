//! Numeric backends.
//!
//! Every algorithm in this crate is generic over [`Scalar`], which is
//! implemented for `f64` (fast, tolerance-based comparisons) and for
//! [`Rational`] (arbitrary precision, exact comparisons). Tolerances are
//! requested through [`Scalar::slack`], which collapses to zero in exact mode.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number used by the exact mode.
pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// `true` when arithmetic is exact and all comparisons are tolerance-free.
    const EXACT: bool;

    /// Parses a decimal literal (`"-1.25"`, `"3e-2"`) or a fraction `"p/q"`.
    fn parse_decimal(text: &str) -> Option<Self>;

    /// Renders the value so that [`Scalar::parse_decimal`] reproduces it exactly.
    fn to_decimal(&self) -> String;

    fn to_f64(&self) -> f64;

    fn from_i64(value: i64) -> Self;

    /// Comparison slack `rel * (1 + scale)`; zero in exact mode.
    fn slack(rel: f64, scale: &Self) -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer) / Self::from_i64(denom)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let value = if let Some((num, den)) = text.split_once('/') {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            num / den
        } else {
            text.parse().ok()?
        };
        value.is_finite().then_some(value)
    }

    fn to_decimal(&self) -> String {
        // Display on f64 is the shortest representation that round-trips.
        format!("{self}")
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn slack(rel: f64, scale: &Self) -> Self {
        rel * (1.0 + scale.abs())
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            return Some(BigRational::new(num, den));
        }
        parse_exact_decimal(text)
    }

    fn to_decimal(&self) -> String {
        exact_decimal(self).unwrap_or_else(|| format!("{}/{}", self.numer(), self.denom()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn slack(_rel: f64, _scale: &Self) -> Self {
        Self::zero()
    }
}

fn parse_exact_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Finite decimal expansion, if the reduced denominator is of the form 2^a 5^b.
fn exact_decimal(value: &Rational) -> Option<String> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let units = scaled.to_integer();
    let negative = units.is_negative();
    let digits = units.abs().to_string();
    if places == 0 {
        return Some(if negative { format!("-{digits}") } else { digits });
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let sign = if negative { "-" } else { "" };
    Some(format!("{sign}{int_part}.{frac_part}"))
}

/// Renders `units / 10^places` as a trimmed decimal string.
pub(crate) fn fixed_decimal(units: i64, places: usize) -> String {
    let negative = units < 0;
    let digits = units.unsigned_abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if negative && units != 0 { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Sup-norm of a slice.
pub fn norm_inf<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc.max_of(v.abs()))
}
