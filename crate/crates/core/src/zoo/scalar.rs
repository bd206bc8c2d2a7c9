//! Number types a function can be probed with: exact rationals and `p + q*sqrt(2)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rat;

/// Ordered field elements that every profile can be evaluated on.
pub trait Scalar: Clone + fmt::Debug + PartialEq {
    fn from_rat(r: Rat) -> Self;
    /// The rational value, if this element is rational.
    fn as_rat(&self) -> Option<&Rat>;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn mul_rat(&self, r: &Rat) -> Self;
    fn sign(&self) -> Ordering;
    fn floor(&self) -> BigInt;
    fn to_f64(&self) -> f64;

    fn neg(&self) -> Self {
        self.mul_rat(&Rat::from_int(-1))
    }

    fn abs(&self) -> Self {
        if self.sign() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    fn add_rat(&self, r: &Rat) -> Self {
        self.add(&Self::from_rat(r.clone()))
    }

    fn cmp_rat(&self, r: &Rat) -> Ordering {
        self.sub(&Self::from_rat(r.clone())).sign()
    }

    fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
}

impl Scalar for Rat {
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn as_rat(&self) -> Option<&Rat> {
        Some(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_rat(&self, r: &Rat) -> Self {
        self * r
    }
    fn sign(&self) -> Ordering {
        self.cmp(&Rat::zero())
    }
    fn floor(&self) -> BigInt {
        Rat::floor(self)
    }
    fn to_f64(&self) -> f64 {
        Rat::to_f64(self)
    }
}

/// `p + q*sqrt(2)` with rational `p`, `q`; irrational exactly when `q != 0`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalarQ2 {
    pub p: Rat,
    pub q: Rat,
}

impl ScalarQ2 {
    pub fn new(p: Rat, q: Rat) -> Self {
        ScalarQ2 { p, q }
    }

    pub fn sqrt2() -> Self {
        ScalarQ2::new(Rat::zero(), Rat::one())
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }
}

/// Sign of `a + b*sqrt(2)`, decided exactly by comparing `a^2` with `2 b^2`.
fn sign_q2(a: &Rat, b: &Rat) -> Ordering {
    let sa = a.cmp(&Rat::zero());
    let sb = b.cmp(&Rat::zero());
    match (sa, sb) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        _ => {
            let a2 = a * a;
            let b2 = b * b * Rat::from_int(2);
            // Opposite signs: the term with the larger square wins.
            match a2.cmp(&b2) {
                Ordering::Greater => sa,
                Ordering::Less => sb,
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

impl Scalar for ScalarQ2 {
    fn from_rat(r: Rat) -> Self {
        ScalarQ2::new(r, Rat::zero())
    }
    fn as_rat(&self) -> Option<&Rat> {
        self.q.is_zero().then_some(&self.p)
    }
    fn add(&self, o: &Self) -> Self {
        ScalarQ2::new(&self.p + &o.p, &self.q + &o.q)
    }
    fn sub(&self, o: &Self) -> Self {
        ScalarQ2::new(&self.p - &o.p, &self.q - &o.q)
    }
    fn mul(&self, o: &Self) -> Self {
        let two = Rat::from_int(2);
        ScalarQ2::new(
            &self.p * &o.p + &self.q * &o.q * two,
            &self.p * &o.q + &self.q * &o.p,
        )
    }
    fn mul_rat(&self, r: &Rat) -> Self {
        ScalarQ2::new(&self.p * r, &self.q * r)
    }
    fn sign(&self) -> Ordering {
        sign_q2(&self.p, &self.q)
    }
    fn floor(&self) -> BigInt {
        if self.q.is_zero() {
            return self.p.floor();
        }
        let guess = self.to_f64().floor();
        let mut n = Rat::from_f64(guess)
            .map(|r| r.floor())
            .unwrap_or_else(|| self.p.floor());
        loop {
            let nr = Rat::from_bigint(n.clone());
            if sign_q2(&(&self.p - &nr), &self.q) == Ordering::Less {
                n -= 1;
            } else if sign_q2(&(&self.p - &nr - Rat::one()), &self.q) != Ordering::Less {
                n += 1;
            } else {
                return n;
            }
        }
    }
    fn to_f64(&self) -> f64 {
        self.p.to_f64() + self.q.to_f64() * std::f64::consts::SQRT_2
    }
}

impl fmt::Display for ScalarQ2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            return write!(f, "{}", self.p);
        }
        if !self.p.is_zero() {
            write!(f, "{}", self.p)?;
            if !self.q.is_negative() {
                f.write_str("+")?;
            }
        }
        write!(f, "{}*sqrt2", self.q)
    }
}

impl fmt::Debug for ScalarQ2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ScalarQ2 {
    type Err = Error;

    /// Accepts `p`, `q*sqrt2`, `sqrt2`, `-sqrt2`, `p+q*sqrt2` and `p-q*sqrt2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(body) = s.strip_suffix("sqrt2") else {
            return Ok(ScalarQ2::from_rat(s.parse()?));
        };
        let body = body.strip_suffix('*').unwrap_or(body);
        // Split off the rational part at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (p, q) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let q = match q {
            "" | "+" => Rat::one(),
            "-" => Rat::from_int(-1),
            q => q.strip_prefix('+').unwrap_or(q).parse()?,
        };
        let p = if p.is_empty() { Rat::zero() } else { p.parse()? };
        Ok(ScalarQ2::new(p, q))
    }
}

/// A probe point whose coordinates may involve `sqrt(2)`.
pub fn parse_q2_point(s: &str) -> Result<Vec<ScalarQ2>> {
    s.split(',').map(str::parse).collect()
}
