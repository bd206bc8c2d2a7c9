use serde::{Deserialize, Serialize};

use crate::geometry::Rat;

/// A function value: a float, optionally the rational it came from, and an absolute error bound.
///
/// When `exact` is present, the true value lies within `err` of it, and `approx`
/// is its nearest float. `err == 0` with `exact` present means the value is exact.
/// The bound does not include the final rounding of `approx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub approx: f64,
    pub exact: Option<Rat>,
    pub err: f64,
}

/// Relative error charged to values produced by libm roots.
pub(crate) const FLOAT_REL_ERR: f64 = 4.0 * f64::EPSILON;

impl Value {
    pub fn exact(r: Rat) -> Self {
        Value {
            approx: r.to_f64(),
            exact: Some(r),
            err: 0.0,
        }
    }

    pub fn zero() -> Self {
        Value::exact(Rat::zero())
    }

    /// A rational approximation with a known absolute error.
    pub fn bounded(r: Rat, err: f64) -> Self {
        Value {
            approx: r.to_f64(),
            exact: Some(r),
            err,
        }
    }

    pub fn float(approx: f64, err: f64) -> Self {
        Value {
            approx,
            exact: None,
            err,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some() && self.err == 0.0
    }

    /// The exact rational value, if there is one.
    pub fn as_exact(&self) -> Option<&Rat> {
        self.exact.as_ref().filter(|_| self.err == 0.0)
    }

    pub fn add(&self, other: &Value) -> Value {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let approx = match &exact {
            Some(r) => r.to_f64(),
            None => self.approx + other.approx,
        };
        Value {
            approx,
            exact,
            err: self.err + other.err,
        }
    }

    pub fn mul(&self, other: &Value) -> Value {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        let approx = match &exact {
            Some(r) => r.to_f64(),
            None => self.approx * other.approx,
        };
        let err = self.approx.abs() * other.err + other.approx.abs() * self.err + self.err * other.err;
        Value { approx, exact, err }
    }

    pub fn scale(&self, c: &Rat) -> Value {
        self.mul(&Value::exact(c.clone()))
    }

    /// `self - other`, used for differences `f(a) - f(b)`.
    pub fn sub(&self, other: &Value) -> Value {
        self.add(&other.scale(&Rat::from_int(-1)))
    }

    pub fn abs(&self) -> Value {
        Value {
            approx: self.approx.abs(),
            exact: self.exact.as_ref().map(Rat::abs),
            err: self.err,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_bounds_propagate() {
        let a = Value::bounded(Rat::new(1, 2), 1e-3);
        let b = Value::exact(Rat::from_int(2));
        let p = a.mul(&b);
        assert_eq!(p.exact, Some(Rat::one()));
        assert!((p.err - 2e-3).abs() < 1e-15);
        let s = a.add(&b);
        assert_eq!(s.exact, Some(Rat::new(5, 2)));
        assert_eq!(s.err, 1e-3);
        assert!(!s.is_exact());
        assert!(b.is_exact());
    }
}
