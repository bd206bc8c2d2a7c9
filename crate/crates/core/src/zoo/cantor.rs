//! The Cantor staircase, extended by 0 to the left of 0 and by 1 to the right of 1.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::Rat;
use crate::zoo::scalar::{Scalar, ScalarQ2};
use crate::zoo::takagi::Truncated;

/// Default cap on ternary digits read before giving up.
pub const DEFAULT_DIGIT_CAP: usize = 256;

/// `phi(x)` exactly, reading at most `DEFAULT_DIGIT_CAP` ternary digits.
pub fn cantor(x: &Rat) -> Result<Rat> {
    cantor_with_cap(x, DEFAULT_DIGIT_CAP)
}

/// Binary expansion of `phi` on `(0,1)`: finite bits, then an optional repeating block.
struct Expansion {
    bits: Vec<bool>,
    period: Option<usize>,
}

pub fn cantor_with_cap(x: &Rat, cap: usize) -> Result<Rat> {
    if !x.is_positive() {
        return Ok(Rat::zero());
    }
    if *x >= Rat::one() {
        return Ok(Rat::one());
    }
    let expansion = match (x.numer().to_u64(), x.denom().to_u64()) {
        (Some(p), Some(q)) if q < 1 << 62 => ternary_to_binary(p as u128, q as u128, cap)?,
        _ => ternary_to_binary(x.numer(), x.denom(), cap)?,
    };
    Ok(expansion.value())
}

/// Reads the ternary digits of `p/q` in `(0,1)` until a digit 1, a zero remainder or a repeat.
fn ternary_to_binary<T>(p: T, q: T, cap: usize) -> Result<Expansion>
where
    T: Integer + Clone + Hash,
{
    let three = T::one() + T::one() + T::one();
    let two = T::one() + T::one();
    // Expansions usually stop within a few digits, where a scan beats hashing.
    let mut recent: Vec<T> = Vec::new();
    let mut seen: HashMap<T, usize> = HashMap::new();
    let mut bits = Vec::new();
    let mut r = p;
    loop {
        if r.is_zero() {
            return Ok(Expansion { bits, period: None });
        }
        let start = if bits.len() <= SCAN_LIMIT {
            recent.iter().position(|x| *x == r)
        } else {
            seen.get(&r).copied()
        };
        if let Some(start) = start {
            return Ok(Expansion {
                period: Some(bits.len() - start),
                bits,
            });
        }
        if bits.len() >= cap {
            return Err(Error::CantorDepth { cap });
        }
        if bits.len() < SCAN_LIMIT {
            recent.push(r.clone());
        } else {
            if bits.len() == SCAN_LIMIT {
                seen.extend(recent.drain(..).enumerate().map(|(i, x)| (x, i)));
            }
            seen.insert(r.clone(), bits.len());
        }
        let (digit, rem) = (r * three.clone()).div_rem(&q);
        if digit.is_one() {
            bits.push(true);
            return Ok(Expansion { bits, period: None });
        }
        bits.push(digit == two);
        r = rem;
    }
}

/// Digits kept in a plain vector before repeat detection switches to a map.
const SCAN_LIMIT: usize = 32;

impl Expansion {
    fn value(&self) -> Rat {
        let n = self.bits.len();
        if self.period.is_none() && n <= 62 {
            let num = self.bits.iter().fold(0i64, |acc, &b| acc << 1 | b as i64);
            return Rat::new(num, 1i64 << n);
        }
        let to_int = |bits: &[bool]| {
            bits.iter()
                .fold(BigInt::zero(), |acc, &b| (acc << 1u32) + if b { 1 } else { 0 })
        };
        match self.period {
            None => Rat::from_big(to_int(&self.bits), BigInt::one() << n),
            Some(l) => {
                let j = n - l;
                let prefix = Rat::from_big(to_int(&self.bits[..j]), BigInt::one() << j);
                let block = to_int(&self.bits[j..]);
                let tail = Rat::from_big(block, (BigInt::one() << l) - 1) * Rat::dyadic(j as u32);
                prefix + tail
            }
        }
    }
}

/// `phi` at an irrational probe, from the first `digits` ternary digits.
///
/// The binary tail after `digits` bits is bounded by `2^-digits`.
pub fn cantor_q2(x: &ScalarQ2, digits: u32) -> Truncated<Rat> {
    if let Some(r) = x.as_rat() {
        if let Ok(v) = cantor_with_cap(r, digits as usize) {
            return Truncated {
                value: v,
                tail_bound: Rat::zero(),
            };
        }
    }
    if x.sign() != Ordering::Greater {
        return exact(Rat::zero());
    }
    if x.cmp_rat(&Rat::one()) != Ordering::Less {
        return exact(Rat::one());
    }
    let three = Rat::from_int(3);
    let mut y = x.clone();
    let mut value = Rat::zero();
    for i in 1..=digits {
        let z = y.mul_rat(&three);
        let digit = z.floor();
        y = z.sub(&ScalarQ2::from_rat(Rat::from_bigint(digit.clone())));
        if digit.is_one() {
            value += Rat::dyadic(i);
            return exact(value);
        }
        if digit == BigInt::from(2) {
            value += Rat::dyadic(i);
        }
    }
    Truncated {
        value,
        tail_bound: Rat::dyadic(digits),
    }
}

fn exact(value: Rat) -> Truncated<Rat> {
    Truncated {
        value,
        tail_bound: Rat::zero(),
    }
}
