use std::sync::Arc;

use rayon::prelude::*;

use super::{rat_below, Draft, LevelTerm, WitnessReport};
use crate::checkers::{lower_bound, AcClassSpec, ClassKind};
use crate::error::{Error, Result};
use crate::geometry::{Point, Rat, Span};
use crate::hierarchy::{square_count, Hierarchy};
use crate::zoo::{FunctionSpec, Value};

/// Whether `v` is certainly at least `r`.
fn at_least(v: &Value, r: &Rat) -> bool {
    match v.as_exact() {
        Some(x) => x >= r,
        None => lower_bound(v) >= r.enclosure().1,
    }
}

fn check_dim(spec: &FunctionSpec, p: &Point) -> Result<()> {
    if p.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: p.dim(),
        });
    }
    Ok(())
}

fn positive(x: &Rat, what: &str) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} = {x} must be positive")))
    }
}

/// `p + t * sum_{v != axis} e_v`.
fn shift_off_axis(p: &Point, axis: usize, t: &Rat) -> Point {
    Point(
        p.0.iter()
            .enumerate()
            .map(|(i, x)| if i == axis { x.clone() } else { x + t })
            .collect(),
    )
}

/// One thin interval refuting the strong class: from `a` to `b` pushed off
/// its axis by `t`, so the volume is `t^(n-1) |b_j - a_j|` while the
/// difference of values stays near `|f(a) - f(b)|`.
pub fn refute_strong0ac(
    spec: &FunctionSpec,
    a: &Point,
    b: &Point,
    delta: &Rat,
    epsilon: Option<Rat>,
) -> Result<WitnessReport> {
    check_dim(spec, a)?;
    check_dim(spec, b)?;
    positive(delta, "delta")?;
    let n = spec.dim();
    if n < 2 {
        return Err(Error::Parameter("thin intervals need dimension at least 2".into()));
    }
    let axes: Vec<usize> = (0..n).filter(|&i| a.0[i] != b.0[i]).collect();
    let [axis] = axes[..] else {
        return Err(Error::NotWitnessPair(format!(
            "a and b must differ in exactly one coordinate, they differ in {}",
            axes.len()
        )));
    };
    let fa = spec.eval(a)?;
    let gap = fa.sub(&spec.eval(b)?).abs();
    if gap.as_exact().is_some_and(Rat::is_zero) || lower_bound(&gap) <= 0.0 {
        return Err(Error::NotWitnessPair("f(a) = f(b)".into()));
    }
    let half_gap = match gap.as_exact() {
        Some(g) => g * Rat::new(1, 2),
        None => rat_below(lower_bound(&gap) / 2.0),
    };
    let run = &b.0[axis] - &a.0[axis];
    let step = if run.is_negative() { -Rat::one() } else { Rat::one() };
    let mut t = delta / (run.abs() * Rat::from_int(2));
    if n > 2 {
        t = t.min(Rat::one());
    }
    let mut draft = Draft::new(
        AcClassSpec::new(ClassKind::StrongZeroAc, n as u32)?,
        delta.clone(),
        epsilon.unwrap_or_else(|| half_gap.pow(n as i32)),
        "analytic:strong0ac",
    );
    let mut found = false;
    for _ in 0..200 {
        let x = shift_off_axis(b, axis, &(&t * &step));
        if at_least(&fa.sub(&spec.eval(&x)?).abs(), &half_gap) {
            found = true;
            break;
        }
        t *= Rat::new(1, 2);
    }
    if !found {
        draft.note("difference never reached half of |f(a) - f(b)| while shrinking t");
    }
    draft.param("axis", axis);
    draft.param("t", &t);
    let x = shift_off_axis(b, axis, &(&t * &step));
    draft.finish(spec, vec![Span::new(a.clone(), x)?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroAcOptions {
    /// Required steepness `m` of the pair.
    pub ratio: Rat,
    pub delta: Rat,
    /// Defaults to `1/3^(n+1)`.
    pub epsilon: Option<Rat>,
    /// How many times the spacing scale `eta` may be halved.
    pub max_halvings: u32,
    /// Largest number of shifted pairs to emit.
    pub max_pairs: u64,
}

impl ZeroAcOptions {
    pub fn new(ratio: Rat, delta: Rat) -> Self {
        ZeroAcOptions {
            ratio,
            delta,
            epsilon: None,
            max_halvings: 40,
            max_pairs: 10_000_000,
        }
    }
}

/// Many translated copies of one steep coordinate step, refuting the class
/// measured by `(max side)^n`. The pair must satisfy
/// `|f(x) - f(y)| >= m |x - y|_1`.
pub fn refute_0ac(spec: &FunctionSpec, x: &Point, y: &Point, opts: &ZeroAcOptions) -> Result<WitnessReport> {
    check_dim(spec, x)?;
    check_dim(spec, y)?;
    positive(&opts.delta, "delta")?;
    positive(&opts.ratio, "ratio")?;
    let n = spec.dim();
    if n < 2 {
        return Err(Error::Parameter("shifted pairs need dimension at least 2".into()));
    }
    let dist = x.l1_dist(y);
    if dist.is_zero() {
        return Err(Error::NotWitnessPair("x = y".into()));
    }
    let total = spec.eval(x)?.sub(&spec.eval(y)?).abs();
    if !at_least(&total, &(&opts.ratio * &dist)) {
        return Err(Error::NotWitnessPair(format!(
            "|f(x) - f(y)| = {:e} is below m |x - y|_1 = {:e}",
            total.approx,
            (&opts.ratio * &dist).to_f64()
        )));
    }
    // z^(j) takes the first j coordinates from x and the rest from y.
    let chain: Vec<Point> = (0..=n)
        .map(|j| Point((0..n).map(|i| if i < j { x.0[i].clone() } else { y.0[i].clone() }).collect()))
        .collect();
    let values = chain.iter().map(|z| spec.eval(z)).collect::<Result<Vec<_>>>()?;
    let mut chosen = None;
    for j in 1..=n {
        let run = (&chain[j].0[j - 1] - &chain[j - 1].0[j - 1]).abs();
        let gamma = values[j].sub(&values[j - 1]).abs();
        if run.is_positive() && at_least(&gamma, &(&opts.ratio * &run)) {
            chosen = Some((j - 1, run, gamma));
            break;
        }
    }
    let Some((axis, run, gamma)) = chosen else {
        return Err(Error::NotWitnessPair("no single-coordinate step keeps the ratio".into()));
    };
    let (hi, lo) = (&chain[axis + 1], &chain[axis]);

    // count = max(1, ceil(gamma^-n / 3)), which lies in [gamma^-n / 3, gamma^-n] when gamma <= 1.
    let count: u64 = match gamma.as_exact() {
        Some(g) => {
            let c = (g.pow(-(n as i32)) * Rat::new(1, 3)).ceil();
            u64::try_from(c).unwrap_or(u64::MAX).max(1)
        }
        None => (gamma.approx.powi(-(n as i32)) / 3.0).ceil().clamp(1.0, u64::MAX as f64) as u64,
    };
    if count > opts.max_pairs {
        return Err(Error::Capacity {
            what: "shifted pairs",
            count: count as u128,
            cap: opts.max_pairs as u128,
        });
    }
    let third = match gamma.as_exact() {
        Some(g) => g * Rat::new(1, 3),
        None => rat_below(lower_bound(&gamma) / 3.0),
    };
    let epsilon = opts
        .epsilon
        .clone()
        .unwrap_or_else(|| Rat::new(1, 3).pow(n as i32 + 1));
    let mut draft = Draft::new(
        AcClassSpec::new(ClassKind::ZeroAc, n as u32)?,
        opts.delta.clone(),
        epsilon,
        "analytic:0ac",
    );
    draft.param("axis", axis);
    draft.param("pairs", count);
    draft.param("gamma", format!("{:e}", gamma.approx));
    if opts.ratio.pow(n as i32) * &opts.delta <= Rat::one() {
        draft.note("m^n delta <= 1: the measure side is not guaranteed below delta");
    }

    // Pair i runs from hi + 2ic to lo + (2i+1)c off the axis, c = eta / (n (2 count + 1)),
    // leaving a gap of c between neighbours. Halve eta until every pair keeps a third
    // of the step.
    let mut eta = &run * Rat::new(1, 2);
    let slots = Rat::from_int(n as i64) * Rat::from_int(2 * count as i64 + 1);
    let mut family = Vec::new();
    let mut ok = false;
    for _ in 0..=opts.max_halvings {
        let c = &eta / &slots;
        family = (1..=count)
            .map(|i| {
                let a = shift_off_axis(hi, axis, &(&c * Rat::from_int(2 * i as i64)));
                let b = shift_off_axis(lo, axis, &(&c * Rat::from_int(2 * i as i64 + 1)));
                Span::new(a, b)
            })
            .collect::<Result<_>>()?;
        let kept = family
            .par_iter()
            .map(|s| Ok(at_least(&spec.eval(&s.a)?.sub(&spec.eval(&s.b)?).abs(), &third)))
            .collect::<Result<Vec<bool>>>()?;
        if kept.iter().all(|&k| k) {
            ok = true;
            break;
        }
        eta *= Rat::new(1, 2);
    }
    draft.param("eta", &eta);
    if !ok {
        draft.note("eta search failed: a shifted pair lost two thirds of the step; f may be discontinuous here");
    }
    draft.finish(spec, family)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductOptions {
    pub delta: Rat,
    /// Number of stacked squares.
    pub k: usize,
    /// Step in `t`; defaults to `d/k`.
    pub tau: Option<Rat>,
    /// Starting `t`.
    pub t: Rat,
    /// Defaults to 1.
    pub epsilon: Option<Rat>,
    /// Defaults to cubes with volume, exponent 2.
    pub class: Option<AcClassSpec>,
}

impl ProductOptions {
    pub fn new(delta: Rat, k: usize) -> Self {
        ProductOptions {
            delta,
            k,
            tau: None,
            t: Rat::zero(),
            epsilon: None,
            class: None,
        }
    }
}

/// `k` disjoint squares along the anti-diagonal, square `i` running from
/// `(s_i, t)` to `(s_i, t + tau)` in diagonal coordinates, so its difference
/// is `|h(s_i)| |g(t + tau) - g(t)|`.
pub fn refute_product_1ac(spec: &FunctionSpec, opts: &ProductOptions) -> Result<WitnessReport> {
    let FunctionSpec::Product { d, .. } = spec else {
        return Err(Error::MethodMismatch(format!("analytic:product needs a product spec, got {spec}")));
    };
    positive(&opts.delta, "delta")?;
    if opts.k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let k = Rat::from_int(opts.k as i64);
    let tau = opts.tau.clone().unwrap_or_else(|| d / &k);
    positive(&tau, "tau")?;
    let class = opts.class.clone().unwrap_or_else(|| AcClassSpec::one_ac(2));
    if class.uses_balls() {
        return Err(Error::MethodMismatch(format!("class {class} is defined by balls")));
    }
    // For the shrunk class the square is grown so its shrink has the tau diagonal.
    let side = match class.shrink() {
        Some(l) => &tau / l,
        None => tau.clone(),
    };
    let spacing = d * Rat::from_int(2) / &k;
    if side >= spacing {
        return Err(Error::Parameter(format!(
            "square side {side} must stay below the spacing 2d/k = {spacing} to keep squares disjoint"
        )));
    }
    let t_end = &opts.t + &tau;
    if opts.t.abs() > *d || t_end.abs() > *d {
        return Err(Error::Parameter(format!("t and t + tau must lie in [-{d}, {d}]")));
    }
    let half = Rat::new(1, 2);
    let family: Vec<Span> = (0..opts.k)
        .map(|i| {
            let s = -d + (Rat::from_int(i as i64) + &half) * &spacing;
            // Center of the square in standard coordinates: P(s, t + tau/2).
            let tc = &opts.t + &tau * &half;
            let c = [&tc - &s, &tc + &s];
            let r = &side * &half;
            Span::new(
                Point(vec![&c[0] - &r, &c[1] - &r]),
                Point(vec![&c[0] + &r, &c[1] + &r]),
            )
        })
        .collect::<Result<_>>()?;
    let mut draft = Draft::new(
        class,
        opts.delta.clone(),
        opts.epsilon.clone().unwrap_or_else(Rat::one),
        "analytic:product",
    );
    draft.param("k", opts.k);
    draft.param("tau", &tau);
    draft.param("t", &opts.t);
    draft.param("t_prime", &t_end);
    draft.param("spacing", &spacing);
    let mut report = draft.finish(spec, family)?;
    if !report.violates() {
        report
            .notes
            .push("no violation at this scale: g behaves like a Lipschitz function here".into());
    }
    Ok(report)
}

/// `(k, S_osc, S_meas)` for each `k`, with `tau = d/k`.
pub fn product_growth(spec: &FunctionSpec, ks: &[usize], delta: &Rat) -> Result<Vec<(usize, f64, Rat)>> {
    ks.iter()
        .map(|&k| {
            let r = refute_product_1ac(spec, &ProductOptions::new(delta.clone(), k))?;
            Ok((k, r.osc_value(), r.sum_measure))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfAcOptions {
    pub first_level: usize,
    pub last_level: usize,
    /// Defaults to `(1/8)^(m0 - 1)` times the root area.
    pub delta: Option<Rat>,
    /// Defaults to `sum 1/(4m)` over the levels.
    pub epsilon: Option<Rat>,
}

/// The half-regular intervals `T_mk` of levels `m0..=M`, differenced through
/// the partial sum `f_1 + ... + f_M`.
pub fn refute_half_ac(hierarchy: &Arc<Hierarchy>, opts: &HalfAcOptions) -> Result<WitnessReport> {
    let (m0, last) = (opts.first_level, opts.last_level);
    if m0 < 2 {
        return Err(Error::Parameter("the first level must be at least 2".into()));
    }
    if last < m0 {
        return Err(Error::Parameter(format!("level range {m0}:{last} is empty")));
    }
    if last > hierarchy.depth() {
        return Err(Error::DepthTooSmall {
            requested: last,
            depth: hierarchy.depth(),
        });
    }
    let spec = FunctionSpec::Hierarchy {
        hierarchy: hierarchy.clone(),
        upto: last,
    };
    let mut family = Vec::new();
    let mut levels = Vec::new();
    for m in m0..=last {
        let mut osc = Rat::zero();
        hierarchy.for_each_square(m, |sq| {
            let w = sq.witness();
            let (a, b) = (w.a().clone(), w.b().clone());
            let diff = hierarchy.value_in(sq, &a) - hierarchy.value_in(sq, &b);
            osc += &diff * &diff;
            family.push(Span { a, b });
        })?;
        levels.push(LevelTerm {
            level: m,
            count: square_count(m),
            osc,
            expected: Rat::new(1, 4 * m as i64),
        });
    }
    let per_level: Rat = levels.iter().map(|l| l.osc.clone()).sum();
    let bound = Rat::new(1, 8).pow(m0 as i32 - 1) * hierarchy.root().measure();
    let mut draft = Draft::new(
        AcClassSpec::new(ClassKind::AlphaAc(Rat::new(1, 2)), 2)?,
        opts.delta.clone().unwrap_or_else(|| bound.clone()),
        opts.epsilon.clone().unwrap_or_else(|| per_level.clone()),
        "analytic:half-ac",
    );
    draft.param("levels", format!("{m0}:{last}"));
    draft.param("per_level_osc", &per_level);
    draft.param("measure_bound", &bound);
    if levels.iter().all(|l| l.osc == l.expected) {
        draft.note("per-level oscillation matches 1/(4m) at every level");
    } else {
        draft.note("per-level oscillation differs from 1/(4m)");
    }
    let mut report = draft.finish(&spec, family)?;
    if report.sum_measure >= bound {
        report.notes.push(format!("measure sum is not below {bound}"));
    }
    report.levels = levels;
    Ok(report)
}
