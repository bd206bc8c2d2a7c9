use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{BallShape, Rat};

/// Which absolute-continuity condition a family is tested against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassKind {
    /// Disjoint `alpha`-regular intervals, volume on the left, `0 < alpha < 1`.
    AlphaAc(Rat),
    /// Disjoint cubes, volume on the left.
    OneAc,
    /// Arbitrary disjoint intervals, `(max side)^n` on the left.
    ZeroAc,
    /// Arbitrary disjoint intervals, volume on the left.
    StrongZeroAc,
    /// Disjoint balls, oscillation over the concentric ball scaled by `lambda`.
    AcH { lambda: Rat, shape: BallShape },
    /// Disjoint cubes, differences across the `lambda`-shrunk cube.
    OneAcH(Rat),
    /// Disjoint balls of one shape, oscillation over the whole ball.
    KAc(BallShape),
}

/// How the size of a family is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMode {
    Volume,
    MaxSidePow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcClassSpec {
    pub kind: ClassKind,
    /// Power applied to both sides; the dimension of the domain by default.
    pub exponent: u32,
}

impl AcClassSpec {
    pub fn new(kind: ClassKind, exponent: u32) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::Parameter("class exponent must be at least 1".into()));
        }
        let open_unit = |x: &Rat, what: &str| -> Result<()> {
            if x.is_positive() && *x < Rat::one() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{what} = {x} must lie in (0, 1)")))
            }
        };
        match &kind {
            ClassKind::AlphaAc(a) => open_unit(a, "alpha")?,
            ClassKind::AcH { lambda, .. } | ClassKind::OneAcH(lambda) => open_unit(lambda, "lambda")?,
            _ => {}
        }
        Ok(AcClassSpec { kind, exponent })
    }

    pub fn one_ac(exponent: u32) -> Self {
        AcClassSpec {
            kind: ClassKind::OneAc,
            exponent,
        }
    }

    pub fn measure_mode(&self) -> MeasureMode {
        match self.kind {
            ClassKind::ZeroAc => MeasureMode::MaxSidePow,
            _ => MeasureMode::Volume,
        }
    }

    /// Smallest admissible regularity, if the class restricts shapes.
    pub fn regularity_threshold(&self) -> Option<Rat> {
        match &self.kind {
            ClassKind::AlphaAc(a) => Some(a.clone()),
            ClassKind::OneAc | ClassKind::OneAcH(_) => Some(Rat::one()),
            _ => None,
        }
    }

    /// The shrink factor applied before differencing, for the shrunk-interval class.
    pub fn shrink(&self) -> Option<&Rat> {
        match &self.kind {
            ClassKind::OneAcH(l) => Some(l),
            _ => None,
        }
    }

    /// Whether the class is defined by balls rather than intervals.
    pub fn uses_balls(&self) -> bool {
        matches!(self.kind, ClassKind::AcH { .. } | ClassKind::KAc(_))
    }

    /// Parses the class part of the CLI syntax and attaches an exponent.
    pub fn parse_with_exponent(s: &str, exponent: u32) -> Result<Self> {
        AcClassSpec::new(s.parse()?, exponent)
    }
}

fn shape_name(shape: BallShape) -> &'static str {
    match shape {
        BallShape::Euclidean => "euclid",
        BallShape::SupNorm => "sup",
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKind::AlphaAc(a) => write!(f, "alpha:{a}"),
            ClassKind::OneAc => f.write_str("1ac"),
            ClassKind::ZeroAc => f.write_str("0ac"),
            ClassKind::StrongZeroAc => f.write_str("strong0ac"),
            ClassKind::AcH { lambda, shape } => write!(f, "ach:{lambda}:{}", shape_name(*shape)),
            ClassKind::OneAcH(l) => write!(f, "1ach:{l}"),
            ClassKind::KAc(shape) => write!(f, "kac:{}", shape_name(*shape)),
        }
    }
}

impl FromStr for ClassKind {
    type Err = Error;

    /// `1ac`, `0ac`, `strong0ac`, `alpha:A`, `1ach:L`, `ach:L[:euclid|sup]`, `kac:euclid|sup`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let head = parts.next().unwrap_or_default();
        let arg = parts.next();
        let extra = parts.next();
        let bad = || Error::Parameter(format!("unknown class {s:?}; expected 1ac, 0ac, strong0ac, alpha:A, 1ach:L, ach:L[:shape] or kac:shape"));
        let rat = |x: Option<&str>| -> Result<Rat> { x.ok_or_else(bad)?.parse() };
        let kind = match head {
            "1ac" | "oneac" if arg.is_none() => ClassKind::OneAc,
            "0ac" | "zeroac" if arg.is_none() => ClassKind::ZeroAc,
            "strong0ac" | "strong-0ac" if arg.is_none() => ClassKind::StrongZeroAc,
            "alpha" | "alphaac" if extra.is_none() => ClassKind::AlphaAc(rat(arg)?),
            "1ach" | "oneach" if extra.is_none() => ClassKind::OneAcH(rat(arg)?),
            "ach" => ClassKind::AcH {
                lambda: rat(arg)?,
                shape: extra.map_or(Ok(BallShape::Euclidean), str::parse)?,
            },
            "kac" if extra.is_none() => ClassKind::KAc(arg.ok_or_else(bad)?.parse()?),
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

impl fmt::Display for AcClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.kind, self.exponent)
    }
}

impl FromStr for AcClassSpec {
    type Err = Error;

    /// A class kind followed by `^n`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, exp) = s
            .rsplit_once('^')
            .ok_or_else(|| Error::Parameter(format!("class {s:?} lacks an exponent '^n'")))?;
        let exponent = exp
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("bad class exponent in {s:?}")))?;
        AcClassSpec::new(kind.parse()?, exponent)
    }
}

impl Serialize for AcClassSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Shape<'a> {
            name: String,
            kind: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            alpha: Option<&'a Rat>,
            #[serde(skip_serializing_if = "Option::is_none")]
            lambda: Option<&'a Rat>,
            #[serde(skip_serializing_if = "Option::is_none")]
            shape: Option<BallShape>,
            exponent: u32,
            measure_mode: MeasureMode,
            regularity_threshold: Option<Rat>,
        }
        let (kind, alpha, lambda, shape) = match &self.kind {
            ClassKind::AlphaAc(a) => ("alpha-ac", Some(a), None, None),
            ClassKind::OneAc => ("one-ac", None, None, None),
            ClassKind::ZeroAc => ("zero-ac", None, None, None),
            ClassKind::StrongZeroAc => ("strong-zero-ac", None, None, None),
            ClassKind::AcH { lambda, shape } => ("ac-h", None, Some(lambda), Some(*shape)),
            ClassKind::OneAcH(l) => ("one-ac-h", None, Some(l), None),
            ClassKind::KAc(shape) => ("k-ac", None, None, Some(*shape)),
        };
        Shape {
            name: self.to_string(),
            kind,
            alpha,
            lambda,
            shape,
            exponent: self.exponent,
            measure_mode: self.measure_mode(),
            regularity_threshold: self.regularity_threshold(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AcClassSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Named {
            name: String,
        }
        let named = Named::deserialize(deserializer)?;
        named.name.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let cases = [
            ("1ac", ClassKind::OneAc),
            ("0ac", ClassKind::ZeroAc),
            ("strong0ac", ClassKind::StrongZeroAc),
            ("alpha:1/2", ClassKind::AlphaAc(Rat::new(1, 2))),
            ("1ach:1/3", ClassKind::OneAcH(Rat::new(1, 3))),
            (
                "ach:1/2",
                ClassKind::AcH {
                    lambda: Rat::new(1, 2),
                    shape: BallShape::Euclidean,
                },
            ),
            ("kac:sup", ClassKind::KAc(BallShape::SupNorm)),
        ];
        for (text, kind) in cases {
            let parsed: ClassKind = text.parse().unwrap();
            assert_eq!(parsed, kind);
            assert_eq!(parsed.to_string().parse::<ClassKind>().unwrap(), kind);
        }
        assert!("2ac".parse::<ClassKind>().is_err());
        assert!("alpha".parse::<ClassKind>().is_err());
        assert!(AcClassSpec::new(ClassKind::AlphaAc(Rat::one()), 2).is_err());
        assert!(AcClassSpec::new(ClassKind::OneAcH(Rat::zero()), 2).is_err());
    }

    #[test]
    fn measure_mode_follows_kind() {
        assert_eq!(AcClassSpec::new(ClassKind::ZeroAc, 2).unwrap().measure_mode(), MeasureMode::MaxSidePow);
        assert_eq!(AcClassSpec::one_ac(2).measure_mode(), MeasureMode::Volume);
        assert_eq!(AcClassSpec::one_ac(2).regularity_threshold(), Some(Rat::one()));
        assert_eq!(AcClassSpec::new(ClassKind::StrongZeroAc, 2).unwrap().regularity_threshold(), None);
    }

    #[test]
    fn json_round_trip() {
        let c = AcClassSpec::new(ClassKind::AlphaAc(Rat::new(1, 2)), 2).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains(r#""name":"alpha:1/2^2""#), "{text}");
        assert!(text.contains(r#""measure_mode":"volume""#));
        assert_eq!(serde_json::from_str::<AcClassSpec>(&text).unwrap(), c);
    }
}
