//! Exact rationals.
//!
//! `Rat` keeps small values as a reduced `i64` pair and spills to
//! `BigRational` only when a result does not fit. The form is canonical, so
//! equal values have equal representations. Values round-trip through the
//! `"p/q"` text form used by the CLI and JSON reports.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    /// Reduced, `den > 0`, `num != i64::MIN`.
    Small(i64, i64),
    /// Reduced, and never representable as `Small`.
    Big(BigRational),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Rat(Repr);

fn fits(n: &BigInt) -> Option<i64> {
    n.to_i64().filter(|&v| v != i64::MIN)
}

impl Rat {
    fn small_or_big(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) if n != i64::MIN => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(BigRational::new_raw(n.into(), d.into()))),
        }
    }

    fn from_ratio(r: BigRational) -> Self {
        match (fits(r.numer()), fits(r.denom())) {
            (Some(n), Some(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(r)),
        }
    }

    fn big(&self) -> Cow<'_, BigRational> {
        match &self.0 {
            Repr::Small(n, d) => Cow::Owned(BigRational::new_raw(BigInt::from(*n), BigInt::from(*d))),
            Repr::Big(r) => Cow::Borrowed(r),
        }
    }

    pub fn zero() -> Self {
        Rat(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rat(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Self {
        Rat::small_or_big(n as i128, 1)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat::from_ratio(BigRational::from_integer(n))
    }

    /// `num/den`, reduced. Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::small_or_big(num as i128, den as i128)
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rat::from_ratio(BigRational::new(num, den))
    }

    /// Exact value of a finite float (every finite `f64` is a dyadic rational).
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rat::from_ratio)
    }

    /// `2^-k`.
    pub fn dyadic(k: u32) -> Self {
        if k < 62 {
            Rat(Repr::Small(1, 1 << k))
        } else {
            Rat::from_ratio(BigRational::new(BigInt::one(), BigInt::one() << k))
        }
    }

    pub fn to_big(&self) -> BigRational {
        self.big().into_owned()
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rat(Repr::Small(n.abs(), *d)),
            Repr::Big(r) => Rat(Repr::Big(r.abs())),
        }
    }

    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Rat::small_or_big(*d as i128, *n as i128)
            }
            Repr::Big(r) => Rat::from_ratio(r.recip()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(n.div_euclid(*d)),
            Repr::Big(r) => r.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(-((-n).div_euclid(*d))),
            Repr::Big(r) => r.ceil().to_integer(),
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract_pos(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rat(Repr::Small(n.rem_euclid(*d), *d)),
            Repr::Big(r) => Rat::from_ratio(r - BigRational::from_integer(self.floor())),
        }
    }

    pub fn pow(&self, e: i32) -> Self {
        Rat::from_ratio(num_traits::Pow::pow(self.big().as_ref(), e))
    }

    /// Floats `(lo, hi)` with `lo <= self <= hi`.
    pub fn enclosure(&self) -> (f64, f64) {
        let v = self.to_f64();
        if v.is_finite() {
            let m = v.abs() * 1e-15 + 1e-300;
            (v - m, v + m)
        } else if v > 0.0 {
            (f64::MAX, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, f64::MIN)
        }
    }

    /// Nearest float; infinite when out of range.
    pub fn to_f64(&self) -> f64 {
        const EXACT: i64 = 1 << 53;
        if let Repr::Small(n, d) = self.0 {
            if n.abs() <= EXACT && d <= EXACT {
                return n as f64 / d as f64;
            }
        }
        let r = self.big();
        r.to_f64().unwrap_or_else(|| {
            if r.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Exact `k`-th root if the value is a perfect `k`-th power of a rational.
    pub fn exact_root(&self, k: u32) -> Option<Self> {
        if k == 0 {
            return None;
        }
        if self.is_negative() {
            if k.is_multiple_of(2) {
                return None;
            }
            return self.abs().exact_root(k).map(|r| -r);
        }
        let (num, den) = (self.numer(), self.denom());
        let n = num.nth_root(k);
        let d = den.nth_root(k);
        if num_traits::Pow::pow(&n, k) == num && num_traits::Pow::pow(&d, k) == den {
            Some(Rat::from_big(n, d))
        } else {
            None
        }
    }

    /// Largest power `2^-k` (k >= 0) that does not exceed `self`; `self` must be positive.
    pub fn dyadic_floor_exponent(&self) -> u32 {
        assert!(self.is_positive());
        let mut k = 0u32;
        let mut p = Rat::one();
        while p > *self {
            k += 1;
            p = Rat::dyadic(k);
        }
        k
    }

    fn add_ref(&self, rhs: &Rat) -> Rat {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            return if b == d {
                Rat::small_or_big(a + c, b)
            } else {
                Rat::small_or_big(a * d + c * b, b * d)
            };
        }
        Rat::from_ratio(self.big().as_ref() + rhs.big().as_ref())
    }

    fn neg_ref(&self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat(Repr::Small(-n, *d)),
            Repr::Big(r) => Rat::from_ratio(-r),
        }
    }

    fn sub_ref(&self, rhs: &Rat) -> Rat {
        self.add_ref(&rhs.neg_ref())
    }

    fn mul_ref(&self, rhs: &Rat) -> Rat {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            return Rat::small_or_big(*a as i128 * *c as i128, *b as i128 * *d as i128);
        }
        Rat::from_ratio(self.big().as_ref() * rhs.big().as_ref())
    }

    fn div_ref(&self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            return Rat::small_or_big(*a as i128 * *d as i128, *b as i128 * *c as i128);
        }
        Rat::from_ratio(self.big().as_ref() / rhs.big().as_ref())
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => (0u8, n, d).hash(state),
            Repr::Big(r) => (1u8, r).hash(state),
        }
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.big().as_ref().cmp(other.big().as_ref()),
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    // [sign] digits [. digits] [e [sign] digits]
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(num, num_traits::Pow::pow(&ten, (-scale) as u32))
    };
    Some(value)
}

impl FromStr for Rat {
    type Err = Error;

    /// Accepts `p/q`, integers, decimals and scientific notation, all converted exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || Error::ParseRational(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n = parse_decimal(n.trim()).ok_or_else(err)?;
            let d = parse_decimal(d.trim()).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rat::from_ratio(n / d));
        }
        parse_decimal(t).map(Rat::from_ratio).ok_or_else(err)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat::from_ratio(r)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $f:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                self.$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                self.$f(rhs)
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                self.$f(&rhs)
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'b Rat) -> Rat {
                self.$f(rhs)
            }
        }
        impl $atr<Rat> for Rat {
            fn $am(&mut self, rhs: Rat) {
                *self = self.$f(&rhs);
            }
        }
        impl<'a> $atr<&'a Rat> for Rat {
            fn $am(&mut self, rhs: &'a Rat) {
                *self = self.$f(rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add_ref);
binop!(Sub, sub, SubAssign, sub_assign, sub_ref);
binop!(Mul, mul, MulAssign, mul_assign, mul_ref);

impl Div<Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        self.div_ref(&rhs)
    }
}

impl<'a> Div<&'a Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        self.div_ref(rhs)
    }
}

impl Div<Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        self.div_ref(&rhs)
    }
}

impl<'b> Div<&'b Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &'b Rat) -> Rat {
        self.div_ref(rhs)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        self.neg_ref()
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        self.neg_ref()
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms_exactly() {
        assert_eq!("1/2".parse::<Rat>().unwrap(), Rat::new(1, 2));
        assert_eq!("-3".parse::<Rat>().unwrap(), Rat::from_int(-3));
        assert_eq!("0.25".parse::<Rat>().unwrap(), Rat::new(1, 4));
        assert_eq!("1e-4".parse::<Rat>().unwrap(), Rat::new(1, 10_000));
        assert_eq!("2.5E2".parse::<Rat>().unwrap(), Rat::from_int(250));
        assert_eq!("6/4".parse::<Rat>().unwrap(), Rat::new(3, 2));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
    }

    #[test]
    fn display_is_reduced() {
        assert_eq!(Rat::new(4, 8).to_string(), "1/2");
        assert_eq!(Rat::new(-6, 3).to_string(), "-2");
        assert_eq!(Rat::new(3, -9).to_string(), "-1/3");
    }

    #[test]
    fn exact_roots() {
        assert_eq!(Rat::new(1, 8).exact_root(3), Some(Rat::new(1, 2)));
        assert_eq!(Rat::new(-27, 64).exact_root(3), Some(Rat::new(-3, 4)));
        assert_eq!(Rat::new(1, 10_000).exact_root(2), Some(Rat::new(1, 100)));
        assert_eq!(Rat::new(1, 2).exact_root(2), None);
        assert_eq!(Rat::new(-1, 4).exact_root(2), None);
    }

    #[test]
    fn serde_round_trip() {
        let r = Rat::new(-7, 12);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"-7/12\"");
        assert_eq!(serde_json::from_str::<Rat>(&s).unwrap(), r);
    }

    fn big(n: &str) -> Rat {
        n.parse().unwrap()
    }

    #[test]
    fn crossing_the_small_range_keeps_one_form() {
        let max = Rat::from_int(i64::MAX);
        let over = &max + Rat::one();
        assert_eq!(over, big("9223372036854775808"));
        assert_eq!(&over - Rat::one(), max);
        assert_eq!((&over - Rat::one()).to_string(), i64::MAX.to_string());
        let tiny = Rat::dyadic(70);
        assert_eq!(&tiny * Rat::from_int(1 << 40), Rat::dyadic(30));
        assert_eq!(Rat::from_int(i64::MIN), big("-9223372036854775808"));
        assert_eq!(-Rat::from_int(i64::MIN), big("9223372036854775808"));
        assert!(Rat::dyadic(70) < Rat::dyadic(69));
        assert!(Rat::dyadic(70) > Rat::zero());
        assert_eq!(Rat::new(i64::MAX, 3) * Rat::new(3, i64::MAX), Rat::one());
    }

    #[test]
    fn fract_and_floor_on_negatives() {
        let r = Rat::new(-5, 4);
        assert_eq!(r.floor(), BigInt::from(-2));
        assert_eq!(r.fract_pos(), Rat::new(3, 4));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb() -> impl Strategy<Value = (i64, i64)> {
        (any::<i64>(), any::<i64>().prop_filter("nonzero", |d| *d != 0))
    }

    fn both(n: i64, d: i64) -> (Rat, BigRational) {
        (Rat::new(n, d), BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #[test]
        fn ops_agree_with_bigrational((a, b) in arb(), (c, d) in arb()) {
            let (x, bx) = both(a, b);
            let (y, by) = both(c, d);
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            prop_assert_eq!(x.floor(), bx.floor().to_integer());
            prop_assert_eq!(x.ceil(), bx.ceil().to_integer());
            prop_assert_eq!(x.to_f64(), bx.to_f64().unwrap());
            prop_assert_eq!(Rat::from(bx.clone()), x.clone());
            prop_assert_eq!(x.to_string().parse::<Rat>().unwrap(), x);
        }
    }
}
