//! Exact rational arithmetic and the small combinatorial toolkit used by the
//! payment and optimality formulas.
//!
//! Every probability, valuation and payment in the engine is a [`Rational`].
//! There is no floating point anywhere on the computation path; `f64` shows up
//! only in [`Rational::to_f64`] and the decimal renderers used for display.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An arbitrary-precision rational number kept in canonical form
/// (positive denominator, numerator and denominator coprime).
///
/// Values whose numerator and denominator fit in an `i64` are stored inline
/// and combined with `i128` intermediates; anything larger moves to a
/// [`BigRational`]. The representation is canonical, so equality and
/// hashing are structural.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// `numer / denom` with `denom > 0`, coprime, `numer != i64::MIN`.
    Small(i64, i64),
    /// Only for values that do not fit `Small`.
    Big(BigRational),
}

fn small_from_i128(numer: i128, denom: i128) -> Option<Repr> {
    let n = i64::try_from(numer).ok().filter(|&n| n != i64::MIN)?;
    let d = i64::try_from(denom).ok()?;
    Some(Repr::Small(n, d))
}

/// Canonical form of `numer / denom` for `denom != 0`.
fn from_i128(numer: i128, denom: i128) -> Rational {
    let (mut numer, mut denom) = if denom < 0 { (-numer, -denom) } else { (numer, denom) };
    let g = numer.gcd(&denom);
    if g > 1 {
        numer /= g;
        denom /= g;
    }
    match small_from_i128(numer, denom) {
        Some(repr) => Rational(repr),
        None => Rational(Repr::Big(BigRational::new_raw(BigInt::from(numer), BigInt::from(denom)))),
    }
}

fn from_big(value: BigRational) -> Rational {
    let small = value
        .numer()
        .to_i128()
        .zip(value.denom().to_i128())
        .and_then(|(n, d)| small_from_i128(n, d));
    match small {
        Some(repr) => Rational(repr),
        None => Rational(Repr::Big(value)),
    }
}

impl Rational {
    /// Builds `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "rational with zero denominator");
        from_big(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        from_big(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    /// Always positive.
    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small(n, d) => from_i128(*d as i128, *n as i128),
            Repr::Big(b) => from_big(b.recip()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(n.div_floor(d)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Lossy conversion for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Decimal rendering with `places` fractional digits, rounding half away
    /// from zero.
    pub fn to_decimal(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let scaled = self.to_big_rational().abs() * BigRational::from_integer(scale.clone());
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let rounded = (scaled + half).floor().to_integer();
        let (int_part, frac_part) = rounded.div_rem(&scale);
        let sign = if self.is_negative() && !rounded.is_zero() { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = places)
        }
    }

    /// Percentage (`100 * self`) with `places` decimals, same rounding as
    /// [`Rational::to_decimal`].
    pub fn to_percent(&self, places: usize) -> String {
        (self * &Rational::from_integer(100)).to_decimal(places)
    }

    pub fn to_big_rational(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => b.clone(),
        }
    }

    fn add_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if b == d {
                    from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
                }
            }
            _ => from_big(self.to_big_rational() + rhs.to_big_rational()),
        }
    }

    fn sub_ref(&self, rhs: &Rational) -> Rational {
        self.add_ref(&-rhs)
    }

    fn mul_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
            _ => from_big(self.to_big_rational() * rhs.to_big_rational()),
        }
    }

    fn div_ref(&self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => from_i128(*a as i128 * *d as i128, *b as i128 * *c as i128),
            _ => from_big(self.to_big_rational() / rhs.to_big_rational()),
        }
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Eq for Rational {}

impl std::hash::Hash for Rational {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big_rational().cmp(&other.to_big_rational()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        from_big(value)
    }
}

impl From<BigInt> for Rational {
    fn from(value: BigInt) -> Self {
        Rational::from_integer(value)
    }
}

macro_rules! from_primitive {
    ($($t:ty),*) => {$(
        impl From<$t> for Rational {
            fn from(value: $t) -> Self {
                from_i128(value as i128, 1)
            }
        }
    )*};
}
from_primitive!(i32, i64, u32, u64, usize);

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $imp:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$imp(&rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                self.$imp(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$imp(&rhs)
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                self.$imp(rhs)
            }
        }
        impl $assign_trait<Rational> for Rational {
            fn $assign_method(&mut self, rhs: Rational) {
                *self = self.$imp(&rhs);
            }
        }
        impl<'a> $assign_trait<&'a Rational> for Rational {
            fn $assign_method(&mut self, rhs: &'a Rational) {
                *self = self.$imp(rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add_ref);
binop!(Sub, sub, SubAssign, sub_assign, sub_ref);
binop!(Mul, mul, MulAssign, mul_assign, mul_ref);
binop!(Div, div, DivAssign, div_assign, div_ref);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(b) => from_big(-b),
        }
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `-? digits ( "/" digits )?`. Surrounding whitespace is ignored.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let text = s.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (num_str, den_str) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !digits(num_str) || !den_str.is_none_or(digits) {
            return Err(bad());
        }
        let mut numer = BigInt::parse_bytes(num_str.as_bytes(), 10).ok_or_else(bad)?;
        if negative {
            numer = -numer;
        }
        let denom = match den_str {
            Some(d) => BigInt::parse_bytes(d.as_bytes(), 10).ok_or_else(bad)?,
            None => BigInt::one(),
        };
        if denom.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(Rational::new(numer, denom))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Accepts `"num/den"` strings and, for convenience, JSON integers.
impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string like \"3/4\" or an integer")
            }

            fn visit_str<E: serde::de::Error>(self, text: &str) -> std::result::Result<Rational, E> {
                text.parse().map_err(E::custom)
            }

            fn visit_i64<E: serde::de::Error>(self, value: i64) -> std::result::Result<Rational, E> {
                Ok(Rational::from(value))
            }

            fn visit_u64<E: serde::de::Error>(self, value: u64) -> std::result::Result<Rational, E> {
                Ok(Rational::from(value))
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

/// Parses a comma-separated list of rationals, e.g. `"3/4,1/4,0,0"`.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(str::parse).collect()
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        // exact at every step: acc * (n - j) is divisible by (j + 1)
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// `lo * (lo + 1) * ... * hi`, with the empty product `psi(lo, lo - 1) = 1`.
pub fn psi(lo: u64, hi: i64) -> Result<BigInt> {
    if lo == 0 {
        return Err(Error::InvalidArgument("psi: lower end must be positive".into()));
    }
    if hi < lo as i64 - 1 {
        return Err(Error::InvalidArgument(format!(
            "psi: upper end {hi} below lower end {lo} minus one"
        )));
    }
    let mut acc = BigInt::one();
    let mut k = lo as i64;
    while k <= hi {
        acc *= BigInt::from(k);
        k += 1;
    }
    Ok(acc)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `sum_{j=0}^{r} (-1)^j C(n, j)` for `r <= n`.
pub fn alternating_binomial_prefix(n: u64, r: u64) -> Result<BigInt> {
    if r > n {
        return Err(Error::InvalidArgument(format!(
            "alternating prefix: r = {r} exceeds n = {n}"
        )));
    }
    let mut acc = BigInt::zero();
    let mut term = BigInt::one();
    for j in 0..=r {
        if j > 0 {
            term = term * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        if j % 2 == 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    Ok(acc)
}

/// `(-1)^k` as a sign multiplier.
pub(crate) fn parity_sign(k: usize) -> BigInt {
    if k.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(12, 5), BigInt::from(792));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn binomial_matches_factorials() {
        for n in 0..15u64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k), factorial(n) / (factorial(k) * factorial(n - k)));
            }
        }
    }

    #[test]
    fn pascal_rule_up_to_thirty() {
        for n in 1..=30u64 {
            for k in 1..=n {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(2, 4).unwrap(), BigInt::from(24));
        assert_eq!(psi(5, 4).unwrap(), BigInt::from(1));
        // loop-product oracle: 8*9*10*11*12
        let oracle: i64 = (8..=12).product();
        assert_eq!(oracle, 95040);
        assert_eq!(psi(8, 12).unwrap(), BigInt::from(oracle));
        assert!(psi(5, 3).is_err());
        assert!(psi(0, 3).is_err());
    }

    #[test]
    fn alternating_prefix_examples() {
        assert_eq!(alternating_binomial_prefix(5, 2).unwrap(), BigInt::from(6));
        assert_eq!(alternating_binomial_prefix(5, 5).unwrap(), BigInt::zero());
        assert_eq!(alternating_binomial_prefix(7, 0).unwrap(), BigInt::one());
        assert!(alternating_binomial_prefix(4, 5).is_err());
    }

    #[test]
    fn alternating_prefix_closed_form_exhaustive() {
        for n in 1..=20u64 {
            for r in 0..n {
                let direct: BigInt = (0..=r)
                    .map(|j| parity_sign(j as usize) * binomial(n, j))
                    .sum();
                let closed = parity_sign(r as usize) * binomial(n - 1, r);
                let got = alternating_binomial_prefix(n, r).unwrap();
                assert_eq!(got, direct);
                assert_eq!(got, closed);
            }
            assert!(alternating_binomial_prefix(n, n).unwrap().is_zero());
        }
    }

    #[test]
    fn parse_and_render() {
        assert_eq!("3/4".parse::<Rational>().unwrap(), r(3, 4));
        assert_eq!("-6/8".parse::<Rational>().unwrap(), r(-3, 4));
        assert_eq!("7".parse::<Rational>().unwrap(), r(7, 1));
        assert_eq!(r(4, 2).to_string(), "2");
        assert_eq!(r(-1, 3).to_string(), "-1/3");
        for bad in ["", "-", "1/0", "1/", "/2", "+1", "1.5", "a/b", "1/-2", "--1"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn decimal_rendering_rounds_half_up() {
        assert_eq!(r(12, 13).to_percent(1), "92.3");
        assert_eq!(r(19, 20).to_percent(1), "95.0");
        assert_eq!(r(1, 8).to_decimal(2), "0.13");
        assert_eq!(r(-1, 8).to_decimal(2), "-0.13");
        assert_eq!(r(2, 3).to_decimal(6), "0.666667");
        assert_eq!(r(5, 1).to_decimal(0), "5");
    }

    #[test]
    fn serde_uses_string_form() {
        let json = serde_json::to_string(&vec![r(1, 3), r(2, 1)]).unwrap();
        assert_eq!(json, r#"["1/3","2"]"#);
        let back: Vec<Rational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![r(1, 3), r(2, 1)]);
        let mixed: Vec<Rational> = serde_json::from_str(r#"[8, -2, "1/2"]"#).unwrap();
        assert_eq!(mixed, vec![r(8, 1), r(-2, 1), r(1, 2)]);
        assert!(serde_json::from_str::<Rational>("0.5").is_err());
        assert!(serde_json::from_str::<Rational>(r#""1/0""#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn render_parse_roundtrip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
                let x = Rational::new(n, d);
                prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
            }

            #[test]
            fn canonical_form(n in -10_000i64..10_000, d in 1i64..10_000) {
                let x = Rational::new(n, d);
                prop_assert!(x.denom().is_positive());
                prop_assert!(x.numer().gcd(&x.denom()).is_one());
            }
        }
    }
}
