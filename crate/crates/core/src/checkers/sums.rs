use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::class::{AcClassSpec, MeasureMode};
use super::diagnostics::{osc_on_ball, Sampler};
use crate::error::{Error, Result};
use crate::geometry::{first_conflict, Ball, Disjointness, Interval, Rat, Span};
use crate::zoo::{FunctionSpec, Value};

/// The two sides of the class implication for one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sums {
    pub sum_measure: Rat,
    /// `sum |f(a_i) - f(b_i)|^n`, exact when every difference is.
    pub sum_osc: Value,
    /// Certified lower bound on the oscillation sum.
    pub osc_lower: f64,
}

impl Sums {
    fn empty() -> Self {
        Sums {
            sum_measure: Rat::zero(),
            sum_osc: Value::zero(),
            osc_lower: 0.0,
        }
    }

    /// Whether the measure side stays strictly below `delta`.
    pub fn below(&self, delta: &Rat) -> bool {
        self.sum_measure < *delta
    }

    /// Whether the oscillation side certainly reaches `epsilon`.
    pub fn reaches(&self, epsilon: &Rat) -> bool {
        match self.sum_osc.as_exact() {
            Some(r) => r >= epsilon,
            None => self.osc_lower >= epsilon.enclosure().1,
        }
    }
}

/// Fixed-shape tree summation: the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Rounding bound for `pairwise_sum` over terms with the given absolute sum.
fn pairwise_rounding(len: usize, abs_sum: f64) -> f64 {
    let depth = (usize::BITS - len.max(1).leading_zeros()) as f64 + 8.0;
    depth * f64::EPSILON * abs_sum
}

/// Largest certified value below `v`.
pub fn lower_bound(v: &Value) -> f64 {
    if let Some(r) = v.as_exact() {
        return r.enclosure().0;
    }
    let slack = v.err + 4.0 * f64::EPSILON * v.approx.abs();
    v.approx - slack
}

/// `|v|^n` with a propagated error bound.
pub fn abs_pow(v: &Value, n: u32) -> Value {
    let v = v.abs();
    if let Some(r) = v.as_exact() {
        return Value::exact(r.pow(n as i32));
    }
    let base = v.exact.as_ref().map_or(v.approx, Rat::to_f64);
    // (x + e)^n - x^n <= n (x + e)^(n-1) e
    let spread = n as f64 * (base + v.err).powi(n as i32 - 1) * v.err;
    let approx = base.powi(n as i32);
    let rounding = 2.0 * (n as f64 + 1.0) * f64::EPSILON * approx.abs();
    match &v.exact {
        Some(r) => Value::bounded(r.pow(n as i32), spread + rounding),
        None => Value::float(approx, spread + rounding),
    }
}

/// Sums a sequence of non-negative terms in index order, exactly when possible.
pub fn sum_values(terms: &[Value]) -> Value {
    if terms.is_empty() {
        return Value::zero();
    }
    if terms.iter().all(Value::is_exact) {
        let total: Rat = terms.iter().filter_map(|t| t.exact.clone()).sum();
        return Value::exact(total);
    }
    let approx: Vec<f64> = terms.iter().map(|t| t.approx).collect();
    let errs: Vec<f64> = terms.iter().map(|t| t.err).collect();
    let abs_sum: f64 = pairwise_sum(&approx.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let err = pairwise_sum(&errs) + pairwise_rounding(terms.len(), abs_sum);
    Value::float(pairwise_sum(&approx), err)
}

fn check_dims(spec: &FunctionSpec, dims: impl Iterator<Item = usize>) -> Result<()> {
    let n = spec.dim();
    for d in dims {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, got: d });
        }
    }
    Ok(())
}

/// Checks disjointness and the class's regularity threshold.
pub fn check_admissible(family: &[Span], class: &AcClassSpec, mode: Disjointness) -> Result<Vec<Interval>> {
    let intervals: Vec<Interval> = family.iter().map(Span::interval).collect();
    if let Some(threshold) = class.regularity_threshold() {
        for (index, iv) in intervals.iter().enumerate() {
            let ok = iv.regularity().map(|r| r >= threshold).unwrap_or(false);
            if !ok {
                return Err(Error::Regularity {
                    index,
                    threshold: threshold.to_string(),
                });
            }
        }
    }
    if let Some((first, second)) = first_conflict(&intervals, mode)? {
        return Err(Error::NotDisjoint { first, second });
    }
    Ok(intervals)
}

/// Per-interval `|f(a) - f(b)|^n` terms, in family order.
pub fn osc_terms(spec: &FunctionSpec, family: &[Span], class: &AcClassSpec) -> Result<Vec<Value>> {
    let n = class.exponent;
    family
        .par_iter()
        .map(|span| {
            let span = match class.shrink() {
                Some(l) => span.shrink(l)?,
                None => span.clone(),
            };
            let diff = spec.eval(&span.a)?.sub(&spec.eval(&span.b)?);
            Ok(abs_pow(&diff, n))
        })
        .collect()
}

/// Both sides of the class implication for an interval family.
pub fn violation_sums(
    spec: &FunctionSpec,
    family: &[Span],
    class: &AcClassSpec,
    mode: Disjointness,
) -> Result<Sums> {
    if class.uses_balls() {
        return Err(Error::MethodMismatch(format!("class {class} is defined by balls; use ball_sums")));
    }
    check_dims(spec, family.iter().map(Span::dim))?;
    let intervals = check_admissible(family, class, mode)?;
    if family.is_empty() {
        return Ok(Sums::empty());
    }
    let sum_measure: Rat = match class.measure_mode() {
        MeasureMode::Volume => intervals.iter().map(Interval::measure).sum(),
        MeasureMode::MaxSidePow => intervals.iter().map(|iv| iv.max_side_pow(class.exponent)).sum(),
    };
    let sum_osc = sum_values(&osc_terms(spec, family, class)?);
    let osc_lower = lower_bound(&sum_osc).max(0.0);
    Ok(Sums {
        sum_measure,
        sum_osc,
        osc_lower,
    })
}

/// Ball-class sums: certified upper bound on the measure side, sampled lower
/// bound on the oscillation side. Only a violation is meaningful.
pub fn ball_sums(spec: &FunctionSpec, balls: &[Ball], class: &AcClassSpec, sampler: &Sampler) -> Result<Sums> {
    use super::class::ClassKind;
    let (lambda, shape) = match &class.kind {
        ClassKind::AcH { lambda, shape } => (Some(lambda), *shape),
        ClassKind::KAc(shape) => (None, *shape),
        _ => {
            return Err(Error::MethodMismatch(format!("class {class} is defined by intervals; use violation_sums")))
        }
    };
    check_dims(spec, balls.iter().map(Ball::dim))?;
    if let Some(i) = balls.iter().position(|b| b.shape != shape) {
        return Err(Error::Parameter(format!("ball {i} does not have the class's shape")));
    }
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            if balls[i].meets(&balls[j]) {
                return Err(Error::NotDisjoint { first: i, second: j });
            }
        }
    }
    let sum_measure: Rat = balls.iter().map(Ball::measure_upper).sum();
    let lows: Vec<f64> = balls
        .par_iter()
        .map(|b| {
            let target = lambda.map_or_else(|| b.clone(), |l| b.scaled(l));
            osc_on_ball(spec, &target, sampler).map(|o| o.lower.powi(class.exponent as i32))
        })
        .collect::<Result<_>>()?;
    // Round the sum down so it stays a lower bound.
    let total = pairwise_sum(&lows);
    let osc_lower = (total - pairwise_rounding(lows.len(), total)).max(0.0);
    Ok(Sums {
        sum_measure,
        sum_osc: Value::float(total, 0.0),
        osc_lower,
    })
}

/// A family judged against `(delta, epsilon)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: AcClassSpec,
    pub delta: Rat,
    pub epsilon: Rat,
    pub sum_measure: Rat,
    pub sum_osc: Value,
    pub osc_lower: f64,
    /// False exactly when the family refutes the implication for `(delta, epsilon)`.
    pub passes: bool,
    pub family: Vec<Span>,
    pub notes: Vec<String>,
}

pub fn check_family(
    spec: &FunctionSpec,
    family: &[Span],
    class: &AcClassSpec,
    delta: &Rat,
    epsilon: &Rat,
    mode: Disjointness,
) -> Result<Verdict> {
    let sums = violation_sums(spec, family, class, mode)?;
    let mut notes = Vec::new();
    if !sums.sum_osc.is_exact() {
        notes.push(format!("oscillation sum carries error bound {:e}", sums.sum_osc.err));
    }
    let passes = !(sums.below(delta) && sums.reaches(epsilon));
    Ok(Verdict {
        class: class.clone(),
        delta: delta.clone(),
        epsilon: epsilon.clone(),
        sum_measure: sums.sum_measure,
        sum_osc: sums.sum_osc,
        osc_lower: sums.osc_lower,
        passes,
        family: family.to_vec(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::zoo::dsl::parse;

    fn span(a: &str, b: &str) -> Span {
        Span::new(a.parse().unwrap(), b.parse().unwrap()).unwrap()
    }

    #[test]
    fn coordinate_function_on_two_squares() {
        let f = parse("affine:x").unwrap();
        let fam = [span("0,0", "1/4,1/4"), span("1/2,0", "3/4,1/4")];
        let s = violation_sums(&f, &fam, &AcClassSpec::one_ac(2), Disjointness::Closed).unwrap();
        assert_eq!(s.sum_measure, Rat::new(1, 8));
        assert_eq!(s.sum_osc.as_exact(), Some(&Rat::new(1, 8)));
    }

    #[test]
    fn rejects_bad_families() {
        let f = parse("affine:x").unwrap();
        let class = AcClassSpec::one_ac(2);
        let thin = [span("0,0", "1,1/2")];
        assert_eq!(
            violation_sums(&f, &thin, &class, Disjointness::Closed),
            Err(Error::Regularity {
                index: 0,
                threshold: "1".into()
            })
        );
        let touching = [span("0,0", "1,1"), span("1,0", "2,1")];
        assert_eq!(
            violation_sums(&f, &touching, &class, Disjointness::Closed),
            Err(Error::NotDisjoint { first: 0, second: 1 })
        );
        assert!(violation_sums(&f, &touching, &class, Disjointness::Interior).is_ok());
    }

    #[test]
    fn empty_family_passes() {
        let f = parse("preset:cbrt-product").unwrap();
        let v = check_family(
            &f,
            &[],
            &AcClassSpec::one_ac(2),
            &Rat::new(1, 100),
            &Rat::one(),
            Disjointness::Closed,
        )
        .unwrap();
        assert!(v.passes);
        assert_eq!(v.sum_measure, Rat::zero());
    }

    #[test]
    fn shrunk_class_differences_inner_corners() {
        let f = parse("affine:x").unwrap();
        let class: AcClassSpec = "1ach:1/2^1".parse().unwrap();
        let s = violation_sums(&f, &[span("0,0", "1,1")], &class, Disjointness::Closed).unwrap();
        assert_eq!(s.sum_osc.as_exact(), Some(&Rat::new(1, 2)));
        assert_eq!(s.sum_measure, Rat::one());
    }

    #[test]
    fn float_terms_keep_a_bound() {
        let f = parse("preset:cbrt-product").unwrap();
        let fam = [span("0,0", "1/8,1/8")];
        let s = violation_sums(&f, &fam, &AcClassSpec::one_ac(2), Disjointness::Closed).unwrap();
        // f(a) = 0, f(b) = cbrt(1/8) = 1/2.
        assert!((s.sum_osc.approx - 0.25).abs() <= s.sum_osc.err + 1e-15);
        assert!(s.osc_lower <= 0.25 && s.osc_lower > 0.25 - 1e-12);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn ball_sums_need_ball_classes() {
        let f = parse("affine:x").unwrap();
        let b = Ball::new(Point::from_ints(&[0, 0]), Rat::one(), crate::geometry::BallShape::SupNorm).unwrap();
        let sampler = Sampler::Grid { step: Rat::new(1, 4) };
        assert!(ball_sums(&f, std::slice::from_ref(&b), &AcClassSpec::one_ac(2), &sampler).is_err());
        let class: AcClassSpec = "kac:sup^2".parse().unwrap();
        let s = ball_sums(&f, &[b], &class, &sampler).unwrap();
        assert_eq!(s.sum_measure, Rat::from_int(4));
        assert!(s.osc_lower > 3.99 && s.osc_lower <= 4.0);
    }
}
