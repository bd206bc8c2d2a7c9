//! The explicit functions: products `h(s) g(t)` in diagonal coordinates, the
//! Takagi tent, the directional Cantor function, affine maps, ridges, the
//! recursive hierarchy, and sums of these.

pub mod cantor;
pub mod dsl;
pub mod profile;
pub mod scalar;
pub mod takagi;
pub mod value;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rat};
use crate::hierarchy::Hierarchy;

pub use cantor::cantor;
pub use profile::{Evaluability, Probe, Profile};
pub use scalar::{Scalar, ScalarQ2};
pub use takagi::{takagi, Truncated};
pub use value::Value;

/// Default number of Takagi terms.
pub const DEFAULT_TAKAGI_TERMS: u32 = 64;

#[derive(Debug, Clone)]
pub enum FunctionSpec {
    /// `f(s x1 + t x2) = h(s) g(t)` for `|s|, |t| <= d`, 0 elsewhere.
    Product { h: Profile, g: Profile, d: Rat },
    /// `T(s/(2d) + 1/2) (1 - |t|/d)` on the same diamond.
    TakagiTent { d: Rat, terms: u32 },
    /// `phi(t1)` where `t1 = (x2 - x1)/2` is the first diagonal coordinate in R^n.
    CantorDirectional { n: usize },
    /// `sum_i c_i x_i + offset`.
    Affine { coeffs: Vec<Rat>, offset: Rat },
    /// `profile(x_axis)` on R^dim, with the profile's support cut to `[-d, d]` if given.
    Ridge {
        dim: usize,
        axis: usize,
        profile: Profile,
        d: Option<Rat>,
    },
    /// Partial sum `f_1 + ... + f_upto` of the hierarchy functions.
    Hierarchy { hierarchy: Arc<Hierarchy>, upto: usize },
    /// `c * inner`.
    Scale { c: Rat, inner: Box<FunctionSpec> },
    Sum(Vec<FunctionSpec>),
}

pub const PRESETS: &[&str] = &[
    "cbrt-product",
    "takagi-tent",
    "unbounded",
    "disc-everywhere",
    "w11-not-w12",
    "cantor-luzin",
    "tent-product",
];

/// Catalog of named constructions.
pub fn preset(name: &str) -> Result<FunctionSpec> {
    let half = Rat::new(1, 2);
    let one = || Profile::Constant(Rat::one());
    Ok(match name {
        "cbrt-product" => FunctionSpec::Product {
            h: one(),
            g: Profile::CubeRoot,
            d: half,
        },
        "takagi-tent" => FunctionSpec::TakagiTent {
            d: half,
            terms: DEFAULT_TAKAGI_TERMS,
        },
        "unbounded" => FunctionSpec::Product {
            h: Profile::InvSqrtAbs,
            g: one(),
            d: half,
        },
        "disc-everywhere" => FunctionSpec::Product {
            h: Profile::RationalIndicator,
            g: one(),
            d: half,
        },
        "w11-not-w12" => FunctionSpec::Product {
            h: Profile::SqrtAbs,
            g: one(),
            d: half,
        },
        "cantor-luzin" => FunctionSpec::CantorDirectional { n: 2 },
        "tent-product" => FunctionSpec::Product {
            h: one(),
            g: Profile::Tent,
            d: half,
        },
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.to_vec(),
            })
        }
    })
}

impl FunctionSpec {
    pub fn affine(coeffs: Vec<Rat>, offset: Rat) -> Self {
        FunctionSpec::Affine { coeffs, offset }
    }

    /// `f(x_1, ..., x_n) = x_axis`.
    pub fn coordinate(n: usize, axis: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); n];
        coeffs[axis] = Rat::one();
        FunctionSpec::affine(coeffs, Rat::zero())
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        FunctionSpec::affine(vec![Rat::zero(); n], c)
    }

    pub fn sum(members: Vec<FunctionSpec>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Parameter("sum of no functions".into()));
        };
        let n = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.dim(),
            });
        }
        Ok(FunctionSpec::Sum(members))
    }

    pub fn scale(self, c: Rat) -> Self {
        FunctionSpec::Scale {
            c,
            inner: Box::new(self),
        }
    }

    pub fn hierarchy(hierarchy: Arc<Hierarchy>) -> Self {
        let upto = hierarchy.depth();
        FunctionSpec::Hierarchy { hierarchy, upto }
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionSpec::Product { .. }
            | FunctionSpec::TakagiTent { .. }
            | FunctionSpec::Hierarchy { .. } => 2,
            FunctionSpec::CantorDirectional { n } => *n,
            FunctionSpec::Affine { coeffs, .. } => coeffs.len(),
            FunctionSpec::Ridge { dim, .. } => *dim,
            FunctionSpec::Scale { inner, .. } => inner.dim(),
            FunctionSpec::Sum(members) => members[0].dim(),
        }
    }

    /// Whether every value is an exact rational at rational points.
    pub fn is_exact(&self) -> bool {
        match self {
            FunctionSpec::Product { h, g, .. } => {
                h.evaluability() == Evaluability::Exact && g.evaluability() == Evaluability::Exact
            }
            FunctionSpec::TakagiTent { .. } => false,
            FunctionSpec::Ridge { profile, .. } => profile.evaluability() == Evaluability::Exact,
            FunctionSpec::Scale { inner, .. } => inner.is_exact(),
            FunctionSpec::Sum(members) => members.iter().all(FunctionSpec::is_exact),
            _ => true,
        }
    }

    pub fn eval(&self, p: &Point) -> Result<Value> {
        self.eval_at(p.coords())
    }

    /// Evaluation at a point whose coordinates may involve `sqrt(2)`.
    pub fn eval_q2(&self, p: &[ScalarQ2]) -> Result<Value> {
        if let Some(rational) = p.iter().map(|c| c.as_rat().cloned()).collect::<Option<Vec<_>>>() {
            return self.eval_at(&rational);
        }
        self.eval_at(p)
    }

    pub fn eval_at<S: Probe>(&self, p: &[S]) -> Result<Value> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        match self {
            FunctionSpec::Product { h, g, d } => {
                let (s, t) = diag(p);
                if outside(&s, d) || outside(&t, d) {
                    return Ok(Value::zero());
                }
                Ok(h.eval(&s, Some(d))?.mul(&g.eval(&t, Some(d))?))
            }
            FunctionSpec::TakagiTent { d, terms } => {
                let (s, t) = diag(p);
                if outside(&s, d) || outside(&t, d) {
                    return Ok(Value::zero());
                }
                let h = Profile::Takagi(*terms).eval(&s, Some(d))?;
                let g = t.abs().mul_rat(&(Rat::from_int(-1) / d)).add_rat(&Rat::one());
                Ok(h.mul(&g.to_value()))
            }
            FunctionSpec::CantorDirectional { .. } => {
                let t1 = p[1].sub(&p[0]).mul_rat(&Rat::new(1, 2));
                t1.cantor_value()
            }
            FunctionSpec::Affine { coeffs, offset } => {
                let mut acc = S::from_rat(offset.clone());
                for (c, x) in coeffs.iter().zip(p) {
                    if !c.is_zero() {
                        acc = acc.add(&x.mul_rat(c));
                    }
                }
                Ok(acc.to_value())
            }
            FunctionSpec::Ridge { axis, profile, d, .. } => profile.eval(&p[*axis], d.as_ref()),
            FunctionSpec::Hierarchy { hierarchy, upto } => {
                let coords: Option<Vec<Rat>> = p.iter().map(|c| c.as_rat().cloned()).collect();
                let coords = coords.ok_or_else(|| {
                    Error::MethodMismatch("hierarchy functions take rational points only".into())
                })?;
                Ok(Value::exact(hierarchy.eval_partial(&Point(coords), *upto)?))
            }
            FunctionSpec::Scale { c, inner } => Ok(inner.eval_at(p)?.scale(c)),
            FunctionSpec::Sum(members) => {
                let mut acc = Value::zero();
                for m in members {
                    acc = acc.add(&m.eval_at(p)?);
                }
                Ok(acc)
            }
        }
    }
}

fn diag<S: Scalar>(p: &[S]) -> (S, S) {
    let half = Rat::new(1, 2);
    (p[1].sub(&p[0]).mul_rat(&half), p[1].add(&p[0]).mul_rat(&half))
}

fn outside<S: Scalar>(x: &S, d: &Rat) -> bool {
    x.abs().cmp_rat(d) == Ordering::Greater
}

impl fmt::Display for FunctionSpec {
    /// The canonical DSL form; parsing it back yields an equivalent spec.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Product { h, g, d } => write!(f, "product(h={h},g={g},d={d})"),
            FunctionSpec::TakagiTent { d, terms } => write!(f, "takagi-tent(d={d},k={terms})"),
            FunctionSpec::CantorDirectional { n } => write!(f, "cantor(n={n})"),
            FunctionSpec::Affine { coeffs, offset } => {
                f.write_str("affine:")?;
                let mut first = true;
                for (i, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if !first {
                        f.write_str("+")?;
                    }
                    first = false;
                    write!(f, "{c}*x{}", i + 1)?;
                }
                if first || !offset.is_zero() {
                    if !first {
                        f.write_str("+")?;
                    }
                    write!(f, "{offset}")?;
                }
                if coeffs.len() != 2 {
                    write!(f, "@{}", coeffs.len())?;
                }
                Ok(())
            }
            FunctionSpec::Ridge { dim, axis, profile, d } => {
                write!(f, "ridge(axis={axis},p={profile},n={dim}")?;
                if let Some(d) = d {
                    write!(f, ",d={d}")?;
                }
                f.write_str(")")
            }
            FunctionSpec::Hierarchy { hierarchy, upto } => {
                write!(f, "hierarchy(depth={},upto={upto})", hierarchy.depth())
            }
            FunctionSpec::Scale { c, inner } => write!(f, "scale(c={c},{inner})"),
            FunctionSpec::Sum(members) => {
                f.write_str("sum(")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{m}")?;
                }
                f.write_str(")")
            }
        }
    }
}
