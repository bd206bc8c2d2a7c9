//! Exact-rational points, axis-aligned intervals, balls and the diagonal basis.

mod rat;

pub use rat::Rat;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R^n with rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<Rat>);

impl Point {
    pub fn new(coords: Vec<Rat>) -> Self {
        Point(coords)
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![Rat::zero(); n])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Point(xs.iter().map(|&x| Rat::from_int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rat::to_f64).collect()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(x, y)| x - y).collect())
    }

    pub fn scale(&self, c: &Rat) -> Point {
        Point(self.0.iter().map(|x| x * c).collect())
    }

    /// Coordinatewise midpoint.
    pub fn midpoint(&self, other: &Point) -> Point {
        let half = Rat::new(1, 2);
        Point(self.0.iter().zip(&other.0).map(|(x, y)| (x + y) * &half).collect())
    }

    pub fn l1_dist(&self, other: &Point) -> Rat {
        self.0.iter().zip(&other.0).map(|(x, y)| (x - y).abs()).sum()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Comma-separated rational literals, e.g. `1/4,7`.
    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(|c| c.parse::<Rat>())
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::ParseRational(s.to_string()));
        }
        Ok(Point(coords))
    }
}

/// How two closed boxes are allowed to touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disjointness {
    /// The closed sets share no point.
    #[default]
    Closed,
    /// Only the interiors must be disjoint; shared faces are allowed.
    Interior,
}

/// Two opposite corners of a box, in the order a function is differenced:
/// `|f(a) - f(b)|`. Unlike `Interval`, `a` need not be the lower corner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub a: Point,
    pub b: Point,
}

impl Span {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        Ok(Span { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn interval(&self) -> Interval {
        Interval::spanned(&self.a, &self.b).expect("corners share a dimension")
    }

    /// The concentric span with every side scaled by `lambda`, corners kept in order.
    pub fn shrink(&self, lambda: &Rat) -> Result<Span> {
        if !lambda.is_positive() || *lambda >= Rat::one() {
            return Err(Error::Parameter(format!("shrink factor {lambda} must lie in (0, 1)")));
        }
        let c = self.a.midpoint(&self.b);
        let half = self.b.sub(&self.a).scale(&(lambda * Rat::new(1, 2)));
        Ok(Span {
            a: c.sub(&half),
            b: c.add(&half),
        })
    }
}

impl From<&Interval> for Span {
    fn from(iv: &Interval) -> Self {
        Span {
            a: iv.a.clone(),
            b: iv.b.clone(),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

impl FromStr for Span {
    type Err = Error;

    /// `"a1,a2:b1,b2"`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("expected two points separated by ':' in {s:?}")))?;
        Span::new(a.parse()?, b.parse()?)
    }
}

/// Closed axis-aligned box `[a, b]` with `a_v <= b_v` on every axis.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    a: Point,
    b: Point,
}

impl Interval {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        if a.dim() == 0 {
            return Err(Error::Parameter("interval of dimension 0".into()));
        }
        if let Some(axis) = a.0.iter().zip(&b.0).position(|(x, y)| x > y) {
            return Err(Error::UnorderedCorners { axis });
        }
        Ok(Interval { a, b })
    }

    /// The box spanned by two arbitrary opposite corners.
    pub fn spanned(p: &Point, q: &Point) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: q.dim(),
            });
        }
        let (lo, hi) = p
            .0
            .iter()
            .zip(&q.0)
            .map(|(x, y)| if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) })
            .unzip();
        Interval::new(Point(lo), Point(hi))
    }

    /// Axis-aligned cube with lower corner `a` and side `side`.
    pub fn cube(a: Point, side: &Rat) -> Result<Self> {
        let b = Point(a.0.iter().map(|x| x + side).collect());
        Interval::new(a, b)
    }

    pub fn a(&self) -> &Point {
        &self.a
    }

    pub fn b(&self) -> &Point {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn sides(&self) -> impl Iterator<Item = Rat> + '_ {
        self.a.0.iter().zip(&self.b.0).map(|(x, y)| y - x)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a.0.iter().zip(&self.b.0).any(|(x, y)| x == y)
    }

    /// Lebesgue measure: the product of side lengths.
    pub fn measure(&self) -> Rat {
        self.sides().fold(Rat::one(), |acc, s| acc * s)
    }

    pub fn max_side(&self) -> Rat {
        self.sides().fold(Rat::zero(), Rat::max)
    }

    /// `(max side)^n`.
    pub fn max_side_pow(&self, n: u32) -> Rat {
        self.max_side().pow(n as i32)
    }

    /// `measure / (max side)^dim`, in `(0, 1]`.
    pub fn regularity(&self) -> Result<Rat> {
        let m = self.max_side();
        if m.is_zero() {
            return Err(Error::ZeroMaxSide);
        }
        Ok(self.measure() / m.pow(self.dim() as i32))
    }

    pub fn center(&self) -> Point {
        self.a.midpoint(&self.b)
    }

    /// Concentric box with every side scaled by `lambda`, `0 < lambda < 1`.
    pub fn shrink(&self, lambda: &Rat) -> Result<Interval> {
        if !lambda.is_positive() || *lambda >= Rat::one() {
            return Err(Error::Parameter(format!("shrink factor {lambda} not in (0,1)")));
        }
        let c = self.center();
        let half = lambda * Rat::new(1, 2);
        let mut a = Vec::with_capacity(self.dim());
        let mut b = Vec::with_capacity(self.dim());
        for ((ci, lo), hi) in c.0.iter().zip(&self.a.0).zip(&self.b.0) {
            let r = (hi - lo) * &half;
            a.push(ci - &r);
            b.push(ci + &r);
        }
        Interval::new(Point(a), Point(b))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.0
                .iter()
                .zip(self.a.0.iter().zip(&self.b.0))
                .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.contains(&other.a) && self.contains(&other.b)
    }

    /// Whether the two boxes conflict under the given disjointness notion.
    pub fn meets(&self, other: &Interval, mode: Disjointness) -> bool {
        match mode {
            Disjointness::Closed => self
                .a
                .0
                .iter()
                .zip(&self.b.0)
                .zip(other.a.0.iter().zip(&other.b.0))
                .all(|((a1, b1), (a2, b2))| a1 <= b2 && a2 <= b1),
            Disjointness::Interior => {
                if self.is_degenerate() || other.is_degenerate() {
                    return false;
                }
                self.a
                    .0
                    .iter()
                    .zip(&self.b.0)
                    .zip(other.a.0.iter().zip(&other.b.0))
                    .all(|((a1, b1), (a2, b2))| a1 < b2 && a2 < b1)
            }
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?},{:?}]", self.a, self.b)
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// `a:b` with comma-separated corners, e.g. `0,0:1,1`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::ParseRational(s.to_string()))?;
        Interval::new(a.parse()?, b.parse()?)
    }
}

#[derive(Deserialize)]
struct RawInterval {
    a: Point,
    b: Point,
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInterval::deserialize(deserializer)?;
        Interval::new(raw.a, raw.b).map_err(serde::de::Error::custom)
    }
}

/// First conflicting pair (original indices, smaller first), or `None` if the family is disjoint.
///
/// Sweeps along the first axis, so families of small well-separated boxes cost
/// `O(k log k)` comparisons rather than `O(k^2)`.
pub fn first_conflict(family: &[Interval], mode: Disjointness) -> Result<Option<(usize, usize)>> {
    let Some(first) = family.first() else {
        return Ok(None);
    };
    let n = first.dim();
    if let Some(bad) = family.iter().find(|i| i.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.dim(),
        });
    }
    // Float enclosures of every corner coordinate: a pair is tested exactly
    // only when the enclosures cannot separate it.
    let boxes: Vec<Vec<(f64, f64)>> = family
        .iter()
        .map(|iv| {
            iv.a.0
                .iter()
                .zip(&iv.b.0)
                .map(|(a, b)| (a.enclosure().0, b.enclosure().1))
                .collect()
        })
        .collect();
    let axis = sweep_axis(&boxes, n);
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by(|&i, &j| boxes[i][axis].0.total_cmp(&boxes[j][axis].0).then(i.cmp(&j)));
    let mut best: Option<(usize, usize)> = None;
    for (pos, &i) in order.iter().enumerate() {
        let hi = boxes[i][axis].1;
        for &j in &order[pos + 1..] {
            if boxes[j][axis].0 > hi {
                break;
            }
            let separated = boxes[i]
                .iter()
                .zip(&boxes[j])
                .any(|(&(a1, b1), &(a2, b2))| a2 > b1 || a1 > b2);
            if !separated && family[i].meets(&family[j], mode) {
                let pair = (i.min(j), i.max(j));
                best = Some(best.map_or(pair, |b| b.min(pair)));
            }
        }
    }
    Ok(best)
}

/// The axis along which the boxes are most spread out relative to their sides,
/// so that the sweep in `first_conflict` compares few pairs.
fn sweep_axis(boxes: &[Vec<(f64, f64)>], n: usize) -> usize {
    let score = |axis: usize| {
        let (mut lo, mut hi, mut sides) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for b in boxes {
            let (a, c) = b[axis];
            lo = lo.min(a);
            hi = hi.max(a);
            sides += c - a;
        }
        let mean = sides / boxes.len() as f64;
        let spread = hi - lo;
        if spread.is_finite() && mean.is_finite() {
            spread / (mean + f64::MIN_POSITIVE)
        } else {
            0.0
        }
    };
    (0..n).max_by(|&x, &y| score(x).total_cmp(&score(y)).then(y.cmp(&x))).unwrap_or(0)
}

pub fn pairwise_disjoint(family: &[Interval], mode: Disjointness) -> Result<bool> {
    Ok(first_conflict(family, mode)?.is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallShape {
    Euclidean,
    SupNorm,
}

impl FromStr for BallShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclid" | "euclidean" | "b" => Ok(BallShape::Euclidean),
            "sup" | "cube" | "q" => Ok(BallShape::SupNorm),
            _ => Err(Error::Parameter(format!("unknown ball shape {s:?}"))),
        }
    }
}

/// Closed ball of a rational radius in the euclidean or sup norm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: Rat,
    pub shape: BallShape,
}

/// Rational upper bound for pi, used to certify euclidean ball volumes from above.
fn pi_upper() -> Rat {
    Rat::new(355, 113)
}

impl Ball {
    pub fn new(center: Point, radius: Rat, shape: BallShape) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::Parameter(format!("ball radius {radius} must be positive")));
        }
        Ok(Ball {
            center,
            radius,
            shape,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        let diffs = p.0.iter().zip(&self.center.0).map(|(x, c)| (x - c).abs());
        match self.shape {
            BallShape::SupNorm => diffs.fold(Rat::zero(), Rat::max) <= self.radius,
            BallShape::Euclidean => diffs.map(|d| &d * &d).sum::<Rat>() <= &self.radius * &self.radius,
        }
    }

    /// Concentric ball with radius scaled by `lambda`.
    pub fn scaled(&self, lambda: &Rat) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: &self.radius * lambda,
            shape: self.shape,
        }
    }

    /// Exact volume for sup-norm balls; a certified rational upper bound for euclidean balls.
    pub fn measure_upper(&self) -> Rat {
        let n = self.dim() as i32;
        match self.shape {
            BallShape::SupNorm => (&self.radius * Rat::from_int(2)).pow(n),
            BallShape::Euclidean => unit_ball_volume_upper(n as u32) * self.radius.pow(n),
        }
    }

    /// Whether the two closed balls share a point; exact.
    pub fn meets(&self, other: &Ball) -> bool {
        let diffs = self.center.0.iter().zip(&other.center.0).map(|(x, y)| (x - y).abs());
        match (self.shape, other.shape) {
            (BallShape::SupNorm, BallShape::SupNorm) => {
                let reach = &self.radius + &other.radius;
                diffs.fold(Rat::zero(), Rat::max) <= reach
            }
            (BallShape::Euclidean, BallShape::Euclidean) => {
                let reach = &self.radius + &other.radius;
                diffs.map(|d| &d * &d).sum::<Rat>() <= &reach * &reach
            }
            // Mixed shapes: compare bounding boxes, which can only overstate contact.
            _ => self.bounding_box().meets(&other.bounding_box(), Disjointness::Closed),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> Interval {
        let a = Point(self.center.0.iter().map(|c| c - &self.radius).collect());
        let b = Point(self.center.0.iter().map(|c| c + &self.radius).collect());
        Interval::new(a, b).expect("radius is positive")
    }
}

/// Upper bound of `pi^(n/2) / Gamma(n/2 + 1)` using `pi <= 355/113`.
fn unit_ball_volume_upper(n: u32) -> Rat {
    let pi = pi_upper();
    if n.is_multiple_of(2) {
        let k = n / 2;
        let fact: Rat = (1..=k as i64).map(Rat::from_int).fold(Rat::one(), |a, b| a * b);
        pi.pow(k as i32) / fact
    } else {
        // 2^n ((n-1)/2)! pi^((n-1)/2) / n!
        let k = (n - 1) / 2;
        let kf: Rat = (1..=k as i64).map(Rat::from_int).fold(Rat::one(), |a, b| a * b);
        let nf: Rat = (1..=n as i64).map(Rat::from_int).fold(Rat::one(), |a, b| a * b);
        Rat::from_int(2).pow(n as i32) * kf * pi.pow(k as i32) / nf
    }
}

/// Orthogonal rational basis of R^n whose last vector is `(1, ..., 1)`.
///
/// For `k < n` the k-th vector is `(-1, ..., -1, k, 0, ..., 0)` with `k` leading
/// `-1`s, so for `n = 2` the basis is `x1 = (-1, 1)`, `x2 = (1, 1)` and the
/// coordinates of `(x, y)` are `s = (y - x)/2`, `t = (y + x)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagBasis {
    pub n: usize,
}

impl DiagBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("diagonal basis needs n >= 2, got {n}")));
        }
        Ok(DiagBasis { n })
    }

    pub fn plane() -> Self {
        DiagBasis { n: 2 }
    }

    /// The k-th basis vector, `k` in `0..n`.
    pub fn vector(&self, k: usize) -> Vec<i64> {
        let n = self.n;
        assert!(k < n);
        if k == n - 1 {
            return vec![1; n];
        }
        let m = k as i64 + 1;
        let mut v = vec![0; n];
        for x in v.iter_mut().take(k + 1) {
            *x = -1;
        }
        v[k + 1] = m;
        v
    }

    fn norm_sq(&self, k: usize) -> i64 {
        if k == self.n - 1 {
            self.n as i64
        } else {
            let m = k as i64 + 1;
            m + m * m
        }
    }

    /// Standard coordinates of `sum_k t_k x_k`.
    pub fn to_std(&self, t: &[Rat]) -> Result<Point> {
        if t.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: t.len(),
            });
        }
        let mut out = vec![Rat::zero(); self.n];
        for (k, tk) in t.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.vector(k)) {
                if c != 0 {
                    *o += tk * Rat::from_int(c);
                }
            }
        }
        Ok(Point(out))
    }

    /// Coordinates of `p` in this basis.
    pub fn from_std(&self, p: &Point) -> Result<Vec<Rat>> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.dim(),
            });
        }
        Ok((0..self.n).map(|k| self.coord(k, p.coords())).collect())
    }

    /// The k-th coordinate alone.
    pub fn coord(&self, k: usize, p: &[Rat]) -> Rat {
        let dot: Rat = self
            .vector(k)
            .into_iter()
            .zip(p)
            .filter(|(c, _)| *c != 0)
            .map(|(c, x)| Rat::from_int(c) * x)
            .sum();
        dot / Rat::from_int(self.norm_sq(k))
    }
}

/// `(s, t) -> s x1 + t x2` in the plane.
pub fn diag_to_std(s: &Rat, t: &Rat) -> Point {
    Point(vec![t - s, s + t])
}

/// `(x, y) -> (s, t) = ((y - x)/2, (y + x)/2)`.
pub fn std_to_diag(p: &Point) -> Result<(Rat, Rat)> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: p.dim(),
        });
    }
    let half = Rat::new(1, 2);
    let (x, y) = (&p.0[0], &p.0[1]);
    Ok(((y - x) * &half, (y + x) * &half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: &[i64], b: &[i64]) -> Interval {
        Interval::new(Point::from_ints(a), Point::from_ints(b)).unwrap()
    }

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn measure_examples() {
        assert_eq!(iv(&[0, 0], &[1, 1]).measure(), Rat::one());
        assert_eq!(iv(&[0, 0], &[2, 1]).measure(), Rat::from_int(2));
        assert_eq!(iv(&[0, 0], &[0, 5]).measure(), Rat::zero());
    }

    #[test]
    fn regularity_examples() {
        assert_eq!(iv(&[0, 0], &[1, 1]).regularity().unwrap(), Rat::one());
        assert_eq!(iv(&[0, 0], &[2, 1]).regularity().unwrap(), r(1, 2));
        assert_eq!(iv(&[0, 0, 0], &[1, 1, 2]).regularity().unwrap(), r(1, 4));
        assert_eq!(iv(&[0, 0], &[0, 0]).regularity(), Err(Error::ZeroMaxSide));
    }

    #[test]
    fn max_side_pow_examples() {
        assert_eq!(iv(&[0, 0], &[2, 1]).max_side_pow(2), Rat::from_int(4));
        assert_eq!(iv(&[0, 0], &[1, 1]).max_side_pow(2), Rat::one());
        assert_eq!(iv(&[0, 0], &[0, 0]).max_side_pow(2), Rat::zero());
    }

    #[test]
    fn shrink_examples() {
        let s = iv(&[0, 0], &[2, 2]).shrink(&r(1, 2)).unwrap();
        assert_eq!(s.a(), &Point(vec![r(1, 2), r(1, 2)]));
        assert_eq!(s.b(), &Point(vec![r(3, 2), r(3, 2)]));
        let s = iv(&[0, 0], &[4, 2]).shrink(&r(1, 4)).unwrap();
        assert_eq!(s.a(), &Point(vec![r(3, 2), r(3, 4)]));
        assert_eq!(s.b(), &Point(vec![r(5, 2), r(5, 4)]));
        assert!(iv(&[0, 0], &[1, 1]).shrink(&Rat::one()).is_err());
        assert!(iv(&[0, 0], &[1, 1]).shrink(&Rat::zero()).is_err());
    }

    #[test]
    fn disjointness_examples() {
        let fam = [iv(&[0, 0], &[1, 1]), iv(&[2, 0], &[3, 1])];
        assert!(pairwise_disjoint(&fam, Disjointness::Closed).unwrap());
        let fam = [iv(&[0, 0], &[2, 2]), iv(&[1, 1], &[3, 3])];
        assert!(!pairwise_disjoint(&fam, Disjointness::Closed).unwrap());
        assert!(pairwise_disjoint(&[], Disjointness::Closed).unwrap());
        // Shared face: only interior-disjoint.
        let fam = [iv(&[0, 0], &[1, 1]), iv(&[1, 0], &[2, 1])];
        assert!(!pairwise_disjoint(&fam, Disjointness::Closed).unwrap());
        assert!(pairwise_disjoint(&fam, Disjointness::Interior).unwrap());
        let fam = [iv(&[0, 0], &[1, 1]), iv(&[0, 0, 0], &[1, 1, 1])];
        assert!(pairwise_disjoint(&fam, Disjointness::Closed).is_err());
    }

    #[test]
    fn unordered_corners_rejected() {
        assert_eq!(
            Interval::new(Point::from_ints(&[0, 2]), Point::from_ints(&[1, 1])),
            Err(Error::UnorderedCorners { axis: 1 })
        );
    }

    #[test]
    fn diag_examples() {
        assert_eq!(diag_to_std(&Rat::zero(), &Rat::one()), Point::from_ints(&[1, 1]));
        assert_eq!(diag_to_std(&Rat::one(), &Rat::zero()), Point::from_ints(&[-1, 1]));
        assert_eq!(
            std_to_diag(&Point::from_ints(&[3, 5])).unwrap(),
            (Rat::one(), Rat::from_int(4))
        );
        let b = DiagBasis::plane();
        assert_eq!(b.vector(0), vec![-1, 1]);
        assert_eq!(b.vector(1), vec![1, 1]);
        assert_eq!(
            b.from_std(&Point::from_ints(&[3, 5])).unwrap(),
            vec![Rat::one(), Rat::from_int(4)]
        );
    }

    #[test]
    fn diag_basis_is_orthogonal() {
        for n in 2..7 {
            let b = DiagBasis::new(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let dot: i64 = b.vector(i).iter().zip(b.vector(j)).map(|(x, y)| x * y).sum();
                    if i == j {
                        assert_eq!(dot, b.norm_sq(i));
                    } else {
                        assert_eq!(dot, 0, "n={n} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn ball_volume_bounds() {
        let c = Point::from_ints(&[0, 0]);
        let sup = Ball::new(c.clone(), Rat::one(), BallShape::SupNorm).unwrap();
        assert_eq!(sup.measure_upper(), Rat::from_int(4));
        let e = Ball::new(c, Rat::one(), BallShape::Euclidean).unwrap();
        let v = e.measure_upper().to_f64();
        assert!((std::f64::consts::PI..std::f64::consts::PI + 1e-6).contains(&v));
        let e3 = Ball::new(Point::from_ints(&[0, 0, 0]), Rat::one(), BallShape::Euclidean).unwrap();
        let v3 = e3.measure_upper().to_f64();
        let exact = 4.0 / 3.0 * std::f64::consts::PI;
        assert!(v3 >= exact && v3 < exact + 1e-6);
        assert!(Ball::new(Point::from_ints(&[0]), Rat::zero(), BallShape::SupNorm).is_err());
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-50i64..50, 1i64..12).prop_map(|(n, d)| Rat::new(n, d))
    }

    fn interval2() -> impl Strategy<Value = Interval> {
        (small_rat(), small_rat(), 1i64..20, 1i64..20, 1i64..6).prop_map(|(x, y, w, h, d)| {
            let a = Point(vec![x.clone(), y.clone()]);
            let b = Point(vec![x + Rat::new(w, d), y + Rat::new(h, d)]);
            Interval::new(a, b).unwrap()
        })
    }

    proptest! {
        #[test]
        fn measure_is_regularity_times_max_side_pow(i in interval2()) {
            prop_assert_eq!(i.measure(), i.regularity().unwrap() * i.max_side_pow(2));
        }

        #[test]
        fn shrink_preserves_regularity_and_scales_measure(i in interval2(), num in 1i64..9) {
            let lambda = Rat::new(num, 10);
            let s = i.shrink(&lambda).unwrap();
            prop_assert_eq!(s.regularity().unwrap(), i.regularity().unwrap());
            prop_assert_eq!(s.measure(), lambda.pow(2) * i.measure());
            prop_assert_eq!(s.center(), i.center());
        }

        #[test]
        fn diag_round_trip(s in small_rat(), t in small_rat()) {
            let p = diag_to_std(&s, &t);
            prop_assert_eq!(std_to_diag(&p).unwrap(), (s, t));
        }

        #[test]
        fn diag_round_trip_general_n(n in 2usize..6, raw in proptest::collection::vec(small_rat(), 6)) {
            let b = DiagBasis::new(n).unwrap();
            let t: Vec<Rat> = raw.into_iter().take(n).collect();
            let p = b.to_std(&t).unwrap();
            prop_assert_eq!(b.from_std(&p).unwrap(), t);
        }

        #[test]
        fn disjointness_is_permutation_invariant(
            fam in proptest::collection::vec(interval2(), 0..8),
            seed in any::<u64>(),
        ) {
            let mut shuffled = fam.clone();
            // Deterministic Fisher-Yates driven by the seed.
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            for mode in [Disjointness::Closed, Disjointness::Interior] {
                prop_assert_eq!(
                    pairwise_disjoint(&fam, mode).unwrap(),
                    pairwise_disjoint(&shuffled, mode).unwrap()
                );
            }
        }

        #[test]
        fn sweep_agrees_with_all_pairs(fam in proptest::collection::vec(interval2(), 0..10)) {
            let brute = (0..fam.len()).all(|i| (i + 1..fam.len()).all(|j| !fam[i].meets(&fam[j], Disjointness::Closed)));
            prop_assert_eq!(pairwise_disjoint(&fam, Disjointness::Closed).unwrap(), brute);
        }
    }
}
