//! The recursive square construction: level-m squares `Q_mk`, the ramp
//! functions `f_m` living on them, and the half-regular intervals `T_mk`.
//!
//! Each level-m square of half-side `d1` has two corner squares of side
//! `d = d1/2` (upper right and lower left). Its `4m(m+1)` children sit inside
//! those corner squares, in the middle thirds of the strips where `f_m` is
//! flat. The relative layout of the children depends only on `m`, so it is
//! computed once per level in units of `d` and reused for every parent.

mod layout;

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Interval, Point, Rat};

pub use layout::{Corner, Group, Layout, Placement};

/// Default cap on the number of squares at the deepest level.
pub const DEFAULT_SQUARE_CAP: u128 = 10_000_000;

/// `r_m = 4^(m-1) (m-1)! m!`, the number of level-m squares.
pub fn square_count(m: usize) -> u128 {
    assert!(m >= 1);
    let mut r: u128 = 1;
    for j in 1..m as u128 {
        r = r.saturating_mul(4 * j * (j + 1));
    }
    r
}

/// `omega_m = 1 / (2^m m!)`, the peak of `f_m`.
pub fn omega(m: usize) -> Rat {
    let fact = (1..=m as i64).fold(Rat::one(), |acc, j| acc * Rat::from_int(j));
    (Rat::from_int(2).pow(m as i32) * fact).recip()
}

/// Axis-aligned square given by its center and half-side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Square {
    pub level: usize,
    /// Canonical index within the level: parent-major, then placement order.
    pub index: u128,
    pub center: Point,
    pub half: Rat,
}

impl Square {
    pub fn side(&self) -> Rat {
        &self.half * Rat::from_int(2)
    }

    pub fn measure(&self) -> Rat {
        self.side().pow(2)
    }

    pub fn interval(&self) -> Interval {
        let lo = Point(self.center.0.iter().map(|c| c - &self.half).collect());
        let hi = Point(self.center.0.iter().map(|c| c + &self.half).collect());
        Interval::new(lo, hi).expect("half-side is positive")
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0.iter()
            .zip(&self.center.0)
            .all(|(x, c)| (x - c).abs() <= self.half)
    }

    /// `T = [O, B1]` with `B1 = (o1 + d, o2 + d1)`, `d = d1/2`.
    pub fn witness(&self) -> Interval {
        let d = &self.half * Rat::new(1, 2);
        let o = &self.center.0;
        let b1 = Point(vec![&o[0] + &d, &o[1] + &self.half]);
        Interval::new(self.center.clone(), b1).expect("corners are ordered")
    }

    /// The corner point `C1 = (o1 + d, o2 + d)` where `f_m` peaks.
    pub fn peak(&self) -> Point {
        let d = &self.half * Rat::new(1, 2);
        Point(self.center.0.iter().map(|c| c + &d).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    pub count: u128,
    pub omega: Rat,
    /// `r_m omega_m^2`, which equals `1/(4m)`.
    pub count_omega_sq: Rat,
    pub total_measure: Rat,
    /// Largest side among the level's squares.
    pub max_side: Rat,
    /// `(1/8)^(m-1)` times the measure of the root square.
    pub measure_bound: Rat,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    depth: usize,
    root: Square,
    /// `layouts[m - 1]` places the children of a level-m square, for `m < depth`.
    layouts: Vec<Layout>,
    /// `ramps[m - 1]` is `f~_m`.
    ramps: Vec<Ramp>,
}

impl Hierarchy {
    /// Builds levels `1..=depth` below the square with the given center and half-side.
    pub fn build(depth: usize, center: Point, half: Rat, cap: u128) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Parameter("hierarchy depth must be at least 1".into()));
        }
        if center.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: center.dim(),
            });
        }
        if !half.is_positive() {
            return Err(Error::Parameter("root half-side must be positive".into()));
        }
        let count = square_count(depth);
        if depth > 40 || count > cap {
            return Err(Error::Capacity {
                what: "hierarchy squares",
                count,
                cap,
            });
        }
        let layouts = (1..depth).map(Layout::new).collect::<Result<Vec<_>>>()?;
        let ramps = (1..=depth).map(Ramp::new).collect();
        Ok(Hierarchy {
            depth,
            root: Square {
                level: 1,
                index: 0,
                center,
                half,
            },
            layouts,
            ramps,
        })
    }

    /// Root square `[0, 1]^2`.
    pub fn build_unit(depth: usize, cap: u128) -> Result<Self> {
        Hierarchy::build(depth, Point(vec![Rat::new(1, 2), Rat::new(1, 2)]), Rat::new(1, 2), cap)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> &Square {
        &self.root
    }

    pub fn layout(&self, m: usize) -> Option<&Layout> {
        self.layouts.get(m.checked_sub(1)?)
    }

    /// `f_m(p)` for `p` inside the level-m square `sq`, using the cached ramp.
    pub fn value_in(&self, sq: &Square, p: &Point) -> Rat {
        value_with(&self.ramps[sq.level - 1], sq, p)
    }

    fn check_level(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.depth {
            return Err(Error::DepthTooSmall {
                requested: m,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Children of a square at level `< depth`, in canonical order.
    pub fn children(&self, parent: &Square) -> Vec<Square> {
        let Some(layout) = self.layout(parent.level) else {
            return Vec::new();
        };
        let per = layout.placements.len() as u128;
        layout
            .placements
            .iter()
            .enumerate()
            .map(|(j, pl)| Square {
                level: parent.level + 1,
                index: parent.index * per + j as u128,
                center: pl.center_in(parent),
                half: pl.half_in(parent),
            })
            .collect()
    }

    /// Visits every level-m square in canonical order.
    pub fn for_each_square(&self, m: usize, mut f: impl FnMut(&Square)) -> Result<()> {
        self.check_level(m)?;
        self.visit(&self.root.clone(), m, &mut f);
        Ok(())
    }

    fn visit(&self, sq: &Square, m: usize, f: &mut impl FnMut(&Square)) {
        if sq.level == m {
            f(sq);
            return;
        }
        for child in self.children(sq) {
            self.visit(&child, m, f);
        }
    }

    pub fn squares(&self, m: usize) -> Result<Vec<Square>> {
        let mut out = Vec::with_capacity(square_count(m).min(1 << 24) as usize);
        self.for_each_square(m, |s| out.push(s.clone()))?;
        Ok(out)
    }

    /// Exact statistics of level `m`, from a full pass over its squares.
    pub fn level_stats(&self, m: usize) -> Result<LevelStats> {
        let mut count = 0u128;
        let mut total = Rat::zero();
        let mut max_side = Rat::zero();
        self.for_each_square(m, |s| {
            count += 1;
            total += s.measure();
            if s.side() > max_side {
                max_side = s.side();
            }
        })?;
        let w = omega(m);
        let count_rat = Rat::from_bigint(count.into());
        Ok(LevelStats {
            level: m,
            count,
            count_omega_sq: &count_rat * &w * &w,
            omega: w,
            total_measure: total,
            max_side,
            measure_bound: Rat::new(1, 8).pow(m as i32 - 1) * self.root.measure(),
        })
    }

    /// The intervals `T_mk`, one per level-m square, in canonical order.
    pub fn witnesses(&self, m: usize) -> Result<Vec<Interval>> {
        let mut out = Vec::with_capacity(square_count(m).min(1 << 24) as usize);
        self.for_each_square(m, |s| out.push(s.witness()))?;
        Ok(out)
    }

    /// The chain of squares containing `p`, from the root down to level `upto` at most.
    pub fn locate(&self, p: &Point, upto: usize) -> Result<Vec<Square>> {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: p.dim(),
            });
        }
        let mut chain = Vec::new();
        if !self.root.contains(p) {
            return Ok(chain);
        }
        let mut current = self.root.clone();
        loop {
            chain.push(current.clone());
            if current.level >= upto.min(self.depth) {
                return Ok(chain);
            }
            let layout = &self.layouts[current.level - 1];
            match layout.locate(&current, p) {
                Some(j) => {
                    let pl = &layout.placements[j];
                    current = Square {
                        level: current.level + 1,
                        index: current.index * layout.placements.len() as u128 + j as u128,
                        center: pl.center_in(&current),
                        half: pl.half_in(&current),
                    };
                }
                None => return Ok(chain),
            }
        }
    }

    /// `f_m(p)`.
    pub fn eval_level(&self, m: usize, p: &Point) -> Result<Rat> {
        Ok(self.eval_levels(p, m)?.pop().expect("m >= 1"))
    }

    /// `[f_1(p), ..., f_upto(p)]`.
    pub fn eval_levels(&self, p: &Point, upto: usize) -> Result<Vec<Rat>> {
        self.check_level(upto)?;
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: p.dim(),
            });
        }
        let mut out = vec![Rat::zero(); upto];
        if !self.root.contains(p) {
            return Ok(out);
        }
        // Descend in local coordinates: offsets from the current square's
        // center in units of its corner side d.
        let d = &self.root.half * Rat::new(1, 2);
        let mut x = (&p.0[0] - &self.root.center.0[0]) / &d;
        let mut y = (&p.0[1] - &self.root.center.0[1]) / &d;
        for m in 1..=upto {
            out[m - 1] = local_value(&self.ramps[m - 1], &x, &y);
            if m == upto {
                break;
            }
            let layout = &self.layouts[m - 1];
            match layout.locate_local(&x, &y) {
                Some(j) => (x, y) = layout.to_child(j, &x, &y),
                None => break,
            }
        }
        Ok(out)
    }

    /// `f_1(p) + ... + f_upto(p)`.
    pub fn eval_partial(&self, p: &Point, upto: usize) -> Result<Rat> {
        Ok(self.eval_levels(p, upto)?.into_iter().sum())
    }

    /// One JSON object per square of levels `1..=upto`.
    pub fn write_squares_jsonl<W: Write>(&self, upto: usize, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            level: usize,
            index: u128,
            center: &'a Point,
            half_side: &'a Rat,
        }
        for m in 1..=upto {
            let mut io_err = None;
            self.for_each_square(m, |s| {
                if io_err.is_some() {
                    return;
                }
                let line = Line {
                    level: s.level,
                    index: s.index,
                    center: &s.center,
                    half_side: &s.half,
                };
                let text = serde_json::to_string(&line).expect("plain data serializes");
                if let Err(e) = writeln!(w, "{text}") {
                    io_err = Some(e);
                }
            })?;
            if let Some(e) = io_err {
                return Err(Error::Parameter(format!("write failed: {e}")));
            }
        }
        Ok(())
    }
}

/// `f_m(p)` for `p` inside the level-m square `sq`.
pub fn level_value(m: usize, sq: &Square, p: &Point) -> Rat {
    value_with(&Ramp::new(m), sq, p)
}

fn value_with(ramp: &Ramp, sq: &Square, p: &Point) -> Rat {
    let d = &sq.half * Rat::new(1, 2);
    let x = (&p.0[0] - &sq.center.0[0]) / &d;
    let y = (&p.0[1] - &sq.center.0[1]) / &d;
    local_value(ramp, &x, &y)
}

/// The level value at local coordinates `(x, y)` in units of `d`.
fn local_value(ramp: &Ramp, x: &Rat, y: &Rat) -> Rat {
    let one = Rat::one();
    let two = Rat::from_int(2);
    let in_corner = |a: &Rat, b: &Rat| *a >= one && *a <= two && *b >= one && *b <= two;
    if in_corner(x, y) {
        return ramp.eval(&(x + y - &two));
    }
    let (nx, ny) = (-x, -y);
    if in_corner(&nx, &ny) {
        return ramp.eval(&(&nx + &ny - &two));
    }
    let c = (y - x).abs();
    if c <= one && (x + y).abs() <= &two + &c {
        return ramp.eval(&c);
    }
    Rat::zero()
}

/// The ramp `f~_m` at `r = rho/d`: 0 for `r >= 1`, `i omega/m` at `2^-i`,
/// `omega` at 0, flat on the middle third of each `[a_i, b_i]`, linear between.
pub fn ramp(m: usize, r: &Rat) -> Rat {
    Ramp::new(m).eval(r)
}

/// `f~_m` as ascending knots `(r, value, slope to the next knot)`.
#[derive(Debug, Clone)]
pub struct Ramp {
    knots: Vec<(Rat, Rat, Rat)>,
}

impl Ramp {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let w = omega(m);
        let mf = Rat::from_int(m as i64);
        let node = |i: usize| Rat::from_int(i as i64) * &w / &mf;
        let mut points: Vec<(Rat, Rat)> = Vec::with_capacity(3 * m + 1);
        for i in (1..=m).rev() {
            let (a, b, fa, fb) = if i == m {
                (Rat::zero(), Rat::dyadic(m as u32 - 1), w.clone(), node(m - 1))
            } else {
                (Rat::dyadic(i as u32), Rat::dyadic(i as u32 - 1), node(i), node(i - 1))
            };
            let third = (&b - &a) / Rat::from_int(3);
            let mid = (&fa + &fb) / Rat::from_int(2);
            points.push((a.clone(), fa));
            points.push((&a + &third, mid.clone()));
            points.push((&b - &third, mid));
        }
        points.push((Rat::one(), Rat::zero()));
        let knots = points
            .iter()
            .enumerate()
            .map(|(k, (r, f))| {
                let slope = match points.get(k + 1) {
                    Some((r2, f2)) => (f2 - f) / (r2 - r),
                    None => Rat::zero(),
                };
                (r.clone(), f.clone(), slope)
            })
            .collect();
        Ramp { knots }
    }

    pub fn eval(&self, r: &Rat) -> Rat {
        // Index of the last knot at or below r.
        let k = self.knots.partition_point(|(x, _, _)| x <= r);
        if k == 0 {
            return self.knots[0].1.clone();
        }
        let (x, f, slope) = &self.knots[k - 1];
        if slope.is_zero() {
            f.clone()
        } else {
            f + slope * (r - x)
        }
    }
}

/// Largest slope of `f~_m` in units of `rho`: `(omega/(2m)) / (d / (3 * 2^(m-1)))`.
pub fn ramp_slope(m: usize, d: &Rat) -> Rat {
    omega(m) / Rat::from_int(2 * m as i64) * Rat::from_int(3) * Rat::from_int(2).pow(m as i32 - 1) / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{first_conflict, Disjointness};

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn counts_and_peaks() {
        assert_eq!(square_count(1), 1);
        assert_eq!(square_count(2), 8);
        assert_eq!(square_count(3), 192);
        assert_eq!(square_count(5), 737_280);
        assert_eq!(omega(1), r(1, 2));
        assert_eq!(omega(2), r(1, 8));
        assert_eq!(omega(3), r(1, 48));
        assert_eq!(omega(5), r(1, 3840));
        for m in 1..12 {
            let c = Rat::from_bigint(square_count(m).into());
            assert_eq!(c * omega(m).pow(2), Rat::new(1, 4 * m as i64));
            assert_eq!(square_count(m + 1), square_count(m) * (4 * m * (m + 1)) as u128);
        }
    }

    #[test]
    fn ramp_nodes_and_plateaus() {
        for m in 1..6 {
            let w = omega(m);
            assert_eq!(ramp(m, &Rat::zero()), w);
            assert_eq!(ramp(m, &Rat::one()), Rat::zero());
            assert_eq!(ramp(m, &r(3, 2)), Rat::zero());
            for i in 1..m {
                let expect = Rat::from_int(i as i64) * &w / Rat::from_int(m as i64);
                assert_eq!(ramp(m, &Rat::dyadic(i as u32)), expect, "m={m} i={i}");
            }
        }
        // m = 2, strip [1/2, 1]: plateau on [2/3, 5/6] at (omega/2 + 0)/2 = 1/32.
        assert_eq!(ramp(2, &r(3, 4)), r(1, 32));
        assert_eq!(ramp(2, &r(2, 3)), r(1, 32));
        // Linear from 1/16 at 1/2 to 1/32 at 2/3.
        assert_eq!(ramp(2, &r(7, 12)), r(3, 64));
    }

    #[test]
    fn ramp_is_nonincreasing_and_continuous() {
        for m in 1..6 {
            let mut prev = ramp(m, &Rat::zero());
            for k in 1..=960 {
                let x = r(k, 960);
                let v = ramp(m, &x);
                assert!(v <= prev, "m={m} at {x}");
                let jump = (&prev - &v).to_f64();
                assert!(jump <= ramp_slope(m, &Rat::one()).to_f64() / 960.0 + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn build_small() {
        let h = Hierarchy::build_unit(3, DEFAULT_SQUARE_CAP).unwrap();
        assert_eq!(h.level_stats(1).unwrap().count, 1);
        assert_eq!(h.level_stats(1).unwrap().omega, r(1, 2));
        assert_eq!(h.level_stats(2).unwrap().count, 8);
        let s3 = h.level_stats(3).unwrap();
        assert_eq!(s3.count, 192);
        assert!(s3.total_measure < Rat::new(1, 64));
        assert_eq!(s3.count_omega_sq, r(1, 12));
    }

    #[test]
    fn levels_are_disjoint_and_nested() {
        let h = Hierarchy::build_unit(3, DEFAULT_SQUARE_CAP).unwrap();
        for m in 1..=3 {
            let squares = h.squares(m).unwrap();
            let boxes: Vec<_> = squares.iter().map(Square::interval).collect();
            assert_eq!(first_conflict(&boxes, Disjointness::Closed).unwrap(), None);
            for (k, s) in squares.iter().enumerate() {
                assert_eq!(s.index, k as u128);
            }
            if m > 1 {
                let parents = h.squares(m - 1).unwrap();
                let per = squares.len() / parents.len();
                for (k, s) in squares.iter().enumerate() {
                    let parent = parents[k / per].interval();
                    assert!(parent.contains_interval(&s.interval()));
                }
            }
        }
    }

    #[test]
    fn witnesses_are_half_regular_with_peak_difference() {
        let h = Hierarchy::build_unit(3, DEFAULT_SQUARE_CAP).unwrap();
        for m in 1..=3 {
            let ws = h.witnesses(m).unwrap();
            assert_eq!(ws.len() as u128, square_count(m));
            assert_eq!(first_conflict(&ws, Disjointness::Closed).unwrap(), None);
            for t in &ws {
                assert_eq!(t.regularity().unwrap(), r(1, 2));
                assert_eq!(h.eval_level(m, t.a()).unwrap(), omega(m));
                assert_eq!(h.eval_level(m, t.b()).unwrap(), Rat::zero());
            }
        }
    }

    #[test]
    fn root_values() {
        let h = Hierarchy::build_unit(2, DEFAULT_SQUARE_CAP).unwrap();
        // Upper corner square of [0,1]^2 is [3/4, 1]^2; its inner corner C1 = (3/4, 3/4).
        assert_eq!(h.eval_partial(&Point(vec![r(3, 4), r(3, 4)]), 1).unwrap(), r(1, 2));
        assert_eq!(h.eval_level(1, &Point(vec![r(1, 2), r(1, 2)])).unwrap(), r(1, 2));
        // Outside the root.
        assert_eq!(h.eval_partial(&Point(vec![r(2, 1), r(2, 1)]), 2).unwrap(), Rat::zero());
        // Off the band and corners: (0.9, 0.1).
        assert_eq!(h.eval_level(1, &Point(vec![r(9, 10), r(1, 10)])).unwrap(), Rat::zero());
        // The band is constant along slope-1 lines.
        let a = h.eval_level(1, &Point(vec![r(1, 2), r(5, 8)])).unwrap();
        let b = h.eval_level(1, &Point(vec![r(3, 8), r(1, 2)])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn children_sit_on_plateaus_of_the_parent() {
        let h = Hierarchy::build_unit(3, DEFAULT_SQUARE_CAP).unwrap();
        for m in 1..3 {
            for parent in h.squares(m).unwrap() {
                for child in h.children(&parent) {
                    let iv = child.interval();
                    let corners = [
                        iv.a().clone(),
                        iv.b().clone(),
                        Point(vec![iv.a().0[0].clone(), iv.b().0[1].clone()]),
                        Point(vec![iv.b().0[0].clone(), iv.a().0[1].clone()]),
                        child.center.clone(),
                    ];
                    let vals: Vec<Rat> = corners.iter().map(|c| level_value(m, &parent, c)).collect();
                    assert!(vals.iter().all(|v| *v == vals[0]), "level {m} child {}", child.index);
                }
            }
        }
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(
            Hierarchy::build_unit(9, DEFAULT_SQUARE_CAP),
            Err(Error::Capacity { .. })
        ));
        assert!(Hierarchy::build_unit(6, DEFAULT_SQUARE_CAP).is_err());
        assert!(Hierarchy::build_unit(5, DEFAULT_SQUARE_CAP).is_ok());
    }

    #[test]
    fn jsonl_export() {
        let h = Hierarchy::build_unit(2, DEFAULT_SQUARE_CAP).unwrap();
        let mut buf = Vec::new();
        h.write_squares_jsonl(2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], r#"{"level":1,"index":0,"center":["1/2","1/2"],"half_side":"1/2"}"#);
    }
}
