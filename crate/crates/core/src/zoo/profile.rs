//! One-variable profiles `h(s)` and `g(t)` used by the product construction.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::Rat;
use crate::zoo::cantor::{cantor, cantor_q2};
use crate::zoo::scalar::{Scalar, ScalarQ2};
use crate::zoo::takagi::takagi;
use crate::zoo::value::{Value, FLOAT_REL_ERR};

/// Ternary digits read for `phi` at irrational probes.
const CANTOR_PROBE_DIGITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Profile {
    Constant(Rat),
    /// `1 - 2|t|` on `[-1/2, 1/2]`.
    Tent,
    /// `t^(1/3)` on `[-d/2, d/2]`.
    CubeRoot,
    /// `|s|^(1/2)`.
    SqrtAbs,
    /// `|s|^(-1/2)`, with a pole at 0.
    InvSqrtAbs,
    /// 1 on the rationals, 0 elsewhere.
    RationalIndicator,
    /// `T(s/(2d) + 1/2)` truncated after the given number of terms.
    Takagi(u32),
    /// The Cantor staircase `phi`.
    Cantor,
    /// Linear interpolation through `(x, y)` nodes with increasing `x`; 0 outside.
    PiecewiseLinear(Vec<(Rat, Rat)>),
}

/// How faithfully a profile can be evaluated at rational arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluability {
    /// Exact rational values.
    Exact,
    /// Exact partial sums with a rational tail bound.
    Truncated,
    /// Floating point, exact only at perfect powers.
    Float,
}

impl Profile {
    pub fn piecewise_linear(nodes: Vec<(Rat, Rat)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Parameter("piecewise-linear profile needs at least 2 nodes".into()));
        }
        if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Parameter("piecewise-linear nodes must have increasing x".into()));
        }
        Ok(Profile::PiecewiseLinear(nodes))
    }

    pub fn evaluability(&self) -> Evaluability {
        match self {
            Profile::Takagi(_) => Evaluability::Truncated,
            Profile::CubeRoot | Profile::SqrtAbs | Profile::InvSqrtAbs => Evaluability::Float,
            _ => Evaluability::Exact,
        }
    }

    /// The closed interval outside of which the profile vanishes, before cutting to `[-d, d]`.
    pub fn own_support(&self, d: Option<&Rat>) -> Option<(Rat, Rat)> {
        match self {
            Profile::Tent => Some((Rat::new(-1, 2), Rat::new(1, 2))),
            Profile::CubeRoot => d.map(|d| {
                let h = d * Rat::new(1, 2);
                (-&h, h)
            }),
            Profile::PiecewiseLinear(nodes) => {
                Some((nodes[0].0.clone(), nodes[nodes.len() - 1].0.clone()))
            }
            _ => None,
        }
    }

    /// Support after intersecting with `[-d, d]`; `None` means the whole line.
    pub fn support(&self, d: Option<&Rat>) -> Option<(Rat, Rat)> {
        let cut = d.map(|d| (-d, d.clone()));
        match (self.own_support(d), cut) {
            (Some((a, b)), Some((c, e))) => Some((a.max(c), b.min(e))),
            (s, None) | (None, s) => s,
        }
    }

    /// Supremum of `|profile|` over its support, when it is a known rational.
    pub fn sup_abs(&self, d: Option<&Rat>) -> Option<Rat> {
        match self {
            Profile::Constant(c) => Some(c.abs()),
            Profile::Tent | Profile::RationalIndicator | Profile::Cantor => Some(Rat::one()),
            Profile::Takagi(_) => Some(Rat::new(2, 3)),
            Profile::PiecewiseLinear(nodes) => nodes.iter().map(|(_, y)| y.abs()).max(),
            Profile::CubeRoot => d.and_then(|d| (d * Rat::new(1, 2)).exact_root(3)),
            Profile::SqrtAbs => d.and_then(|d| d.exact_root(2)),
            Profile::InvSqrtAbs => None,
        }
    }

    /// Lipschitz constant on the real line (including the jumps to 0 at the support edges).
    pub fn lipschitz(&self, d: Option<&Rat>) -> Option<Rat> {
        match self {
            Profile::Constant(c) if c.is_zero() => Some(Rat::zero()),
            // A nonzero constant jumps to 0 at the edges of [-d, d].
            Profile::Constant(_) => d.is_none().then(Rat::zero),
            Profile::Tent | Profile::PiecewiseLinear(_) if !self.own_support_within(d) => None,
            Profile::Tent => Some(Rat::from_int(2)),
            Profile::PiecewiseLinear(nodes) => {
                let (first, last) = (&nodes[0].1, &nodes[nodes.len() - 1].1);
                if !first.is_zero() || !last.is_zero() {
                    return None;
                }
                nodes.windows(2).map(|w| ((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).abs()).max()
            }
            _ => None,
        }
    }

    fn own_support_within(&self, d: Option<&Rat>) -> bool {
        match (self.own_support(d), d) {
            (Some((a, b)), Some(d)) => -d <= a && b <= *d,
            _ => true,
        }
    }

    /// `profile(x)` with support cut to `[-d, d]` when `d` is given.
    pub fn eval<S: Scalar + Probe>(&self, x: &S, d: Option<&Rat>) -> Result<Value> {
        if let Some((lo, hi)) = self.support(d) {
            if x.cmp_rat(&lo) == Ordering::Less || x.cmp_rat(&hi) == Ordering::Greater {
                return Ok(Value::zero());
            }
        }
        match self {
            Profile::Constant(c) => Ok(Value::exact(c.clone())),
            Profile::Tent => Ok(x.to_value_scaled(&Rat::from_int(-2), true, &Rat::one())),
            Profile::CubeRoot => Ok(root(x, 3, false)),
            Profile::SqrtAbs => Ok(root(x, 2, false)),
            Profile::InvSqrtAbs => {
                if x.is_zero() {
                    return Err(Error::Pole("|s|^(-1/2) at s = 0".into()));
                }
                Ok(root(x, 2, true))
            }
            Profile::RationalIndicator => Ok(Value::exact(if x.as_rat().is_some() {
                Rat::one()
            } else {
                Rat::zero()
            })),
            Profile::Takagi(k) => {
                let arg = match d {
                    Some(d) => x.mul_rat(&(Rat::one() / (d * Rat::from_int(2)))).add_rat(&Rat::new(1, 2)),
                    None => x.clone(),
                };
                let t = takagi(&arg, *k);
                let mut v = t.value.to_value();
                v.err += t.tail_bound.to_f64();
                Ok(v)
            }
            Profile::Cantor => x.cantor_value(),
            Profile::PiecewiseLinear(nodes) => {
                let i = nodes
                    .windows(2)
                    .position(|w| x.cmp_rat(&w[1].0) != Ordering::Greater)
                    .unwrap_or(nodes.len() - 2);
                let ((x0, y0), (x1, y1)) = (&nodes[i], &nodes[i + 1]);
                let slope = (y1 - y0) / (x1 - x0);
                Ok(x.add_rat(&-x0).mul_rat(&slope).add_rat(y0).to_value())
            }
        }
    }
}

/// Conversions from probe scalars to reported values.
pub trait Probe: Scalar {
    /// The value with a float error bound covering the conversion.
    fn to_value(&self) -> Value;
    /// `|x|` for the magnitude of the float image, used to size error bounds.
    fn magnitude(&self) -> f64;
    fn cantor_value(&self) -> Result<Value>;

    /// `c * (|x| or x) + offset`.
    fn to_value_scaled(&self, c: &Rat, abs: bool, offset: &Rat) -> Value {
        let base = if abs { self.abs() } else { self.clone() };
        base.mul_rat(c).add_rat(offset).to_value()
    }
}

impl Probe for Rat {
    fn to_value(&self) -> Value {
        Value::exact(self.clone())
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn cantor_value(&self) -> Result<Value> {
        cantor(self).map(Value::exact)
    }
}

impl Probe for ScalarQ2 {
    fn to_value(&self) -> Value {
        match self.as_rat() {
            Some(r) => Value::exact(r.clone()),
            None => Value::float(self.to_f64(), self.magnitude() * FLOAT_REL_ERR),
        }
    }
    fn magnitude(&self) -> f64 {
        self.p.to_f64().abs() + 1.5 * self.q.to_f64().abs()
    }
    fn cantor_value(&self) -> Result<Value> {
        let t = cantor_q2(self, CANTOR_PROBE_DIGITS);
        Ok(Value::bounded(t.value, t.tail_bound.to_f64()))
    }
}

/// Signed `k`-th root (`k` = 3) or `sqrt(|x|)` (`k` = 2), optionally inverted.
fn root<S: Probe>(x: &S, k: u32, invert: bool) -> Value {
    let base = if k.is_multiple_of(2) { x.abs() } else { x.clone() };
    if let Some(r) = base.as_rat() {
        if let Some(exact) = r.exact_root(k) {
            return Value::exact(if invert { exact.recip() } else { exact });
        }
    }
    let f = base.to_f64();
    let v = if k == 3 { f.cbrt() } else { f.sqrt() };
    let v = if invert { 1.0 / v } else { v };
    // Input conversion error is damped by the root; charge a few ulps overall.
    let rel = FLOAT_REL_ERR + base.magnitude() * FLOAT_REL_ERR / f.abs().max(f64::MIN_POSITIVE);
    Value::float(v, v.abs() * rel)
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "const:{c}"),
            Profile::Tent => f.write_str("tent"),
            Profile::CubeRoot => f.write_str("cbrt"),
            Profile::SqrtAbs => f.write_str("sqrt"),
            Profile::InvSqrtAbs => f.write_str("invsqrt"),
            Profile::RationalIndicator => f.write_str("ratind"),
            Profile::Takagi(k) => write!(f, "takagi:{k}"),
            Profile::Cantor => f.write_str("cantor"),
            Profile::PiecewiseLinear(nodes) => {
                f.write_str("pwl:")?;
                for (i, (x, y)) in nodes.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{x}@{y}")?;
                }
                Ok(())
            }
        }
    }
}
