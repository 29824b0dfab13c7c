//! Exact monetary amounts and the rational helpers used around them.
//!
//! All balances are signed integers of euro cents held in an `i128`, which
//! comfortably covers ±2^100. Fractions (haircuts, recovery rates, interest
//! and inflation rates) are parsed from decimal text into exact rationals so
//! that no binary floating point enters the bookkeeping.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::{BigRational, Ratio};
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const CENTS_PER_EURO: i128 = 100;
pub const CENTS_PER_MILLION: i128 = 100_000_000;
pub const CENTS_PER_BILLION: i128 = 100_000_000_000;

/// Signed amount of euro cents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i128);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i128) -> Self {
        Money(cents)
    }

    pub const fn from_euros(euros: i128) -> Self {
        Money(euros * CENTS_PER_EURO)
    }

    pub const fn from_millions(millions: i128) -> Self {
        Money(millions * CENTS_PER_MILLION)
    }

    pub const fn from_billions(billions: i128) -> Self {
        Money(billions * CENTS_PER_BILLION)
    }

    pub const fn cents(self) -> i128 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub const fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub const fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn checked_add(self, rhs: Money) -> Option<Money> {
        self.0.checked_add(rhs.0).map(Money)
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.0))
    }

    /// Multiplies by an exact rational and rounds back to whole cents.
    pub fn scale(self, factor: &BigRational, rounding: Rounding) -> Money {
        let exact = self.to_rational() * factor;
        Money::from_rational(&exact, rounding)
    }

    /// Rounds an exact rational cent value to whole cents.
    pub fn from_rational(value: &BigRational, rounding: Rounding) -> Money {
        let rounded = match rounding {
            Rounding::Floor => value.floor().to_integer(),
            Rounding::HalfEven => round_half_even(value),
        };
        Money(
            rounded
                .to_i128()
                .expect("rounded amount exceeds the i128 cent range"),
        )
    }

    /// Euro rendering with two decimals, e.g. `-65000000000.00`.
    pub fn to_euro_string(self) -> String {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        format!("{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    HalfEven,
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Money {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.trim().parse::<i128>().map(Money)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Mul<i128> for Money {
    type Output = Money;
    fn mul(self, rhs: i128) -> Money {
        Money(self.0 * rhs)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |acc, m| acc + *m)
    }
}

/// An exact fraction of cents, produced by the minimum-norm reconstruction
/// whose entries carry a denominator of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalMoney(Ratio<i128>);

impl RationalMoney {
    pub fn new(numerator: i128, denominator: i128) -> Self {
        RationalMoney(Ratio::new(numerator, denominator))
    }

    pub fn zero() -> Self {
        RationalMoney(Ratio::zero())
    }

    pub fn numerator(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_integral(&self) -> bool {
        self.0.is_integer()
    }

    pub fn as_ratio(&self) -> Ratio<i128> {
        self.0
    }

    pub fn to_money(&self) -> Option<Money> {
        self.is_integral().then(|| Money(self.0.to_integer()))
    }

    pub fn round_half_even(&self) -> Money {
        let big = BigRational::new(
            BigInt::from(self.numerator()),
            BigInt::from(self.denominator()),
        );
        Money::from_rational(&big, Rounding::HalfEven)
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl From<Money> for RationalMoney {
    fn from(m: Money) -> Self {
        RationalMoney(Ratio::from_integer(m.0))
    }
}

impl Add for RationalMoney {
    type Output = RationalMoney;
    fn add(self, rhs: Self) -> Self {
        RationalMoney(self.0 + rhs.0)
    }
}

impl Neg for RationalMoney {
    type Output = RationalMoney;
    fn neg(self) -> Self {
        RationalMoney(-self.0)
    }
}

impl Mul<i128> for RationalMoney {
    type Output = RationalMoney;
    fn mul(self, rhs: i128) -> Self {
        RationalMoney(self.0 * rhs)
    }
}

impl Sum for RationalMoney {
    fn sum<I: Iterator<Item = RationalMoney>>(iter: I) -> Self {
        iter.fold(RationalMoney::zero(), Add::add)
    }
}

impl fmt::Display for RationalMoney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integral() {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), self.denominator())
        }
    }
}

/// Parses plain decimal text (`0.05`, `-1.5`, `3`, `2.5e-1` is not accepted)
/// into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let mut numer: BigInt = format!("{whole}{frac}").parse().ok()?;
    if negative {
        numer = -numer;
    }
    let denom = num::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(numer, denom))
}

/// Parses a decimal fraction and checks it lies in `[0, 1]`.
pub fn parse_unit_fraction(name: &str, text: &str) -> Result<BigRational> {
    let value = parse_decimal(text)
        .ok_or_else(|| Error::param(name, format!("`{text}` is not a decimal number")))?;
    check_unit_fraction(name, &value)?;
    Ok(value)
}

pub fn check_unit_fraction(name: &str, value: &BigRational) -> Result<()> {
    if value.is_negative() || *value > BigRational::one() {
        return Err(Error::param(name, format!("{value} is outside [0, 1]")));
    }
    Ok(())
}

/// Round-half-to-even of an exact rational to the nearest integer.
pub fn round_half_even(value: &BigRational) -> BigInt {
    let floor = value.floor();
    let diff = value - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let floor = floor.to_integer();
    if diff < half {
        floor
    } else if diff > half {
        floor + 1
    } else if (&floor % BigInt::from(2)).is_zero() {
        floor
    } else {
        floor + 1
    }
}

/// Renders an exact rational with `places` decimals, rounding half-to-even.
pub fn render_decimal(value: &BigRational, places: usize) -> String {
    let scale = num::pow(BigInt::from(10), places);
    let scaled = round_half_even(&(value * BigRational::from_integer(scale.clone())));
    let negative = scaled.is_negative();
    let abs = scaled.abs();
    let whole = &abs / &scale;
    let frac = &abs % &scale;
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>places$}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn billions_are_exact_cents() {
        assert_eq!(Money::from_billions(65).cents(), 6_500_000_000_000);
        assert_eq!(
            Money::from_millions(2_500),
            Money::from_cents(250_000_000_000)
        );
        assert_eq!(
            Money::from_billions(-65).to_euro_string(),
            "-65000000000.00"
        );
    }

    #[test]
    fn money_spans_two_to_the_hundred() {
        let big = Money::from_cents(1i128 << 100);
        assert_eq!((big + big - big).cents(), 1i128 << 100);
        assert_eq!((-big).cents(), -(1i128 << 100));
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("0.05"), Some(q(1, 20)));
        assert_eq!(parse_decimal("-1.5"), Some(q(-3, 2)));
        assert_eq!(parse_decimal("3"), Some(q(3, 1)));
        assert_eq!(parse_decimal(".5"), Some(q(1, 2)));
        assert_eq!(parse_decimal("1e5"), None);
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("-"), None);
    }

    #[test]
    fn unit_fraction_bounds() {
        assert!(parse_unit_fraction("h", "1.0").is_ok());
        assert!(parse_unit_fraction("h", "1.01").is_err());
        assert!(parse_unit_fraction("h", "-0.1").is_err());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(&q(5, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&q(7, 2)), BigInt::from(4));
        assert_eq!(round_half_even(&q(-5, 2)), BigInt::from(-2));
        assert_eq!(round_half_even(&q(-7, 2)), BigInt::from(-4));
        assert_eq!(round_half_even(&q(10, 3)), BigInt::from(3));
        assert_eq!(render_decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(render_decimal(&q(71, 100), 4), "0.7100");
        assert_eq!(render_decimal(&q(-1, 8), 2), "-0.12");
        assert_eq!(render_decimal(&q(44_100, 400), 2), "110.25");
    }

    #[test]
    fn scaling_rounds_as_requested() {
        let m = Money::from_cents(10);
        assert_eq!(m.scale(&q(1, 4), Rounding::HalfEven), Money::from_cents(2));
        assert_eq!(m.scale(&q(1, 3), Rounding::Floor), Money::from_cents(3));
        assert_eq!(
            Money::from_millions(4_500).scale(&q(4, 5), Rounding::Floor),
            Money::from_millions(3_600)
        );
    }

    #[test]
    fn rational_money() {
        let r = RationalMoney::new(35, 3);
        assert!(!r.is_integral());
        assert_eq!(r.to_money(), None);
        assert_eq!(r.round_half_even(), Money::from_cents(12));
        assert_eq!((r * 3).to_money(), Some(Money::from_cents(35)));
        assert_eq!(r.to_string(), "35/3");
    }
}
