//! Exact numbers: big integers, reduced rationals and dyadic rationals.
//!
//! Integers and rationals come from `num-bigint` / `num-rational`. Dyadics are
//! implemented here because every coordinate the presenters produce is an
//! iterated midpoint, and comparing two dyadics only needs a shift.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use num_bigint::BigInt;
pub use num_rational::BigRational as Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseNumberError {
    #[error("invalid integer literal `{0}`")]
    Integer(String),
    #[error("invalid rational literal `{0}`")]
    Rational(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` is not a dyadic rational")]
    NotDyadic(String),
}

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_bigint(s: &str) -> Result<BigInt, ParseNumberError> {
    BigInt::from_str(s.trim()).map_err(|_| ParseNumberError::Integer(s.to_string()))
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseNumberError> {
    let s = s.trim();
    match s.split_once('/') {
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| ParseNumberError::Rational(s.to_string()))?,
        )),
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| ParseNumberError::Rational(s.to_string()))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| ParseNumberError::Rational(s.to_string()))?;
            if q.is_zero() {
                return Err(ParseNumberError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Canonical text form `"p/q"`; integers render as `"p/1"`.
pub fn render_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn digits_to_decimal(scaled: BigInt, places: usize) -> String {
    let digits = scaled.to_string();
    if places == 0 {
        return digits;
    }
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    format!("{int_part}.{frac_part}")
}

/// Decimal expansion of a nonnegative rational, truncated toward zero after
/// `places` fractional digits.
pub fn truncate_decimal(x: &Rational, places: usize) -> String {
    assert!(!x.is_negative(), "truncate_decimal expects a nonnegative value");
    let scale = num_traits::pow(BigInt::from(10), places);
    digits_to_decimal((x.numer() * scale).div_floor(x.denom()), places)
}

/// Decimal expansion rounded half-up at `places` fractional digits.
pub fn round_decimal(x: &Rational, places: usize) -> String {
    assert!(!x.is_negative(), "round_decimal expects a nonnegative value");
    let scale = num_traits::pow(BigInt::from(10), places);
    let twice = (x.numer() * scale * 2u32 + x.denom()).div_floor(&(x.denom() * 2u32));
    digits_to_decimal(twice, places)
}

/// An exact binary rational `num / 2^exp2`, kept canonical: `num` is odd
/// unless `exp2 == 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp2: u64,
}

impl Dyadic {
    pub fn new(num: BigInt, exp2: u64) -> Self {
        let mut d = Dyadic { num, exp2 };
        d.normalize();
        d
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { num: BigInt::from(v), exp2: 0 }
    }

    pub fn zero() -> Self {
        Dyadic::from_int(0)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp2 = 0;
            return;
        }
        if self.exp2 == 0 {
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp2);
        if tz > 0 {
            self.num >>= tz;
            self.exp2 -= tz;
        }
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn exp2(&self) -> u64 {
        self.exp2
    }

    /// Numerators of `self` and `other` over the common denominator `2^e`.
    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, u64) {
        let e = self.exp2.max(other.exp2);
        let a = &self.num << (e - self.exp2);
        let b = &other.num << (e - other.exp2);
        (a, b, e)
    }

    /// `self / 2`.
    pub fn half(&self) -> Dyadic {
        self.div_pow2(1)
    }

    /// `self / 2^e`.
    pub fn div_pow2(&self, e: u64) -> Dyadic {
        Dyadic::new(self.num.clone(), self.exp2 + e)
    }

    /// `self * m`.
    pub fn mul_int(&self, m: &BigInt) -> Dyadic {
        Dyadic::new(&self.num * m, self.exp2)
    }

    /// Exact midpoint `(a + b) / 2`.
    pub fn mid(a: &Dyadic, b: &Dyadic) -> Dyadic {
        let (x, y, e) = a.aligned(b);
        Dyadic::new(x + y, e + 1)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.num.clone(), BigInt::one() << self.exp2)
    }

    pub fn from_rational(x: &Rational) -> Option<Dyadic> {
        let den = x.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz) != BigInt::one() {
            return None;
        }
        Some(Dyadic::new(x.numer().clone(), tz))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Lossy approximation for diagnostics.
    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp2 == other.exp2 {
            return self.num.cmp(&other.num);
        }
        let (sa, sb) = (self.num.sign(), other.num.sign());
        if sa != sb {
            return sa.cmp(&sb);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp2 == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp2)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.bits() > 128 {
            write!(f, "Dyadic(~{:.6e}, exp2={})", self.to_f64(), self.exp2)
        } else {
            write!(f, "Dyadic({self})")
        }
    }
}

impl FromStr for Dyadic {
    type Err = ParseNumberError;

    /// Accepts `"n"`, `"n/2^e"` or any `"p/q"` whose reduced denominator is a
    /// power of two.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some((n, e)) = t.split_once("/2^") {
            let num = parse_bigint(n).map_err(|_| ParseNumberError::NotDyadic(s.to_string()))?;
            let exp2 = e.trim().parse::<u64>().map_err(|_| ParseNumberError::NotDyadic(s.to_string()))?;
            return Ok(Dyadic::new(num, exp2));
        }
        let r = parse_rational(t)?;
        Dyadic::from_rational(&r).ok_or_else(|| ParseNumberError::NotDyadic(s.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    num: String,
    exp2: u64,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRepr { num: self.num.to_string(), exp2: self.exp2 }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DyadicRepr::deserialize(deserializer)?;
        let num = parse_bigint(&repr.num).map_err(serde::de::Error::custom)?;
        Ok(Dyadic::new(num, repr.exp2))
    }
}

/// Serde adapter for `Rational` as a `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `BigInt` as a decimal string.
pub mod bigint_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        parse_bigint(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn midpoints() {
        assert_eq!(Dyadic::mid(&dy("0"), &dy("2")), dy("1"));
        let m = Dyadic::mid(&dy("1"), &dy("2"));
        assert_eq!((m.num().clone(), m.exp2()), (int(3), 1));
        assert_eq!(Dyadic::mid(&dy("3/2"), &dy("2")), dy("7/4"));
        // Cross-check against decimal expansion of the rational value.
        assert_eq!(truncate_decimal(&dy("7/4").to_rational(), 4), "1.7500");
    }

    #[test]
    fn scaling_stays_canonical() {
        assert_eq!(dy("2").half(), dy("1"));
        assert_eq!(dy("2").half().exp2(), 0);
        assert_eq!(dy("3").div_pow2(2), dy("3/4"));
        assert_eq!(dy("3/4").mul_int(&int(4)), dy("3"));
        assert_eq!(dy("0").half(), dy("0"));
    }

    #[test]
    fn canonical_form() {
        let d = Dyadic::new(int(12), 3);
        assert_eq!((d.num().clone(), d.exp2()), (int(3), 1));
        let z = Dyadic::new(int(0), 9);
        assert_eq!(z.exp2(), 0);
        assert_eq!(dy("6/4"), dy("3/2"));
        assert!(matches!("1/3".parse::<Dyadic>(), Err(ParseNumberError::NotDyadic(_))));
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_decimal(&ratio(243, 60), 7), "4.0500000");
        // 494/120 = 4.11666..., which truncates to ...6; the rounded form ends in 7.
        assert_eq!(truncate_decimal(&ratio(494, 120), 7), "4.1166666");
        assert_eq!(round_decimal(&ratio(494, 120), 7), "4.1166667");
        assert_eq!(truncate_decimal(&ratio(1, 1), 3), "1.000");
        assert_eq!(truncate_decimal(&ratio(3488, 840), 7), "4.1523809");
        assert_eq!(truncate_decimal(&ratio(1, 200), 2), "0.00");
        assert_eq!(truncate_decimal(&ratio(7, 2), 0), "3");
    }

    #[test]
    fn rational_text() {
        assert_eq!(render_rational(&ratio(6, 4)), "3/2");
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational(" 5 ").unwrap(), ratio(5, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn json_form() {
        let d = dy("7/4");
        let js = serde_json::to_string(&d).unwrap();
        assert_eq!(js, r#"{"num":"7","exp2":2}"#);
        assert_eq!(serde_json::from_str::<Dyadic>(&js).unwrap(), d);
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-1_000_000i64..1_000_000, 0u64..40).prop_map(|(n, e)| Dyadic::new(int(n), e))
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(p, q)| ratio(p, q))
    }

    proptest! {
        #[test]
        fn mid_is_strictly_between(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let m = Dyadic::mid(&lo, &hi);
            prop_assert!(lo < m && m < hi);
            prop_assert_eq!(m.to_rational(), (lo.to_rational() + hi.to_rational()) / int(2));
        }

        #[test]
        fn order_matches_rationals(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        }

        #[test]
        fn rational_arithmetic_laws(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
        }

        #[test]
        fn text_round_trips(a in arb_dyadic(), r in arb_rational()) {
            prop_assert_eq!(a.to_string().parse::<Dyadic>().unwrap(), a.clone());
            prop_assert_eq!(parse_rational(&render_rational(&r)).unwrap(), r);
            let js = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(serde_json::from_str::<Dyadic>(&js).unwrap(), a);
        }
    }
}
