use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{first_conflict, Disjointness, Interval, Point, Rat};
use crate::hierarchy::Square;

/// Largest dyadic refinement tried when fitting a strip's squares.
const MAX_REFINEMENT: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corner {
    Upper,
    Lower,
}

/// Where in a strip a child square sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Group {
    /// Along the corner square's horizontal edge, `0 < v < beta`.
    A,
    /// Along the vertical edge, `0 < u < beta`.
    B,
    /// On the line `v = u/2`.
    P,
    /// On the line `v = 2u`.
    Q,
}

/// A child square in units of the parent's corner side `d`, with `(u, v)`
/// measured from the corner's inner vertex `C1` (mirrored for the lower corner).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub corner: Corner,
    pub strip: usize,
    pub group: Group,
    pub slot: usize,
    pub u: Rat,
    pub v: Rat,
    pub side: Rat,
}

impl Placement {
    pub fn center_in(&self, parent: &Square) -> Point {
        let d = &parent.half * Rat::new(1, 2);
        let (o1, o2) = (&parent.center.0[0], &parent.center.0[1]);
        let du = (&self.u + Rat::one()) * &d;
        let dv = (&self.v + Rat::one()) * &d;
        match self.corner {
            Corner::Upper => Point(vec![o1 + du, o2 + dv]),
            Corner::Lower => Point(vec![o1 - du, o2 - dv]),
        }
    }

    pub fn half_in(&self, parent: &Square) -> Rat {
        &self.side * &parent.half * Rat::new(1, 4)
    }

    fn local_box(&self) -> Interval {
        let h = &self.side * Rat::new(1, 2);
        Interval::new(
            Point(vec![&self.u - &h, &self.v - &h]),
            Point(vec![&self.u + &h, &self.v + &h]),
        )
        .expect("side is positive")
    }
}

/// Children of a level-m square, upper corner first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub m: usize,
    pub placements: Vec<Placement>,
    /// Dyadic refinement `e` per strip: the side is `2^-(i+2+e)`.
    pub refinement: Vec<u32>,
    /// `(u, v, side/2)` as floats, for the prefilter in `locate`.
    #[serde(skip)]
    approx: Vec<[f64; 3]>,
    /// Child centers in parent units of `d`, and the factor `4/side` to the child's units.
    #[serde(skip)]
    frames: Vec<(Rat, Rat, Rat)>,
}

struct Strip {
    lo: Rat,
    hi: Rat,
    beta: Rat,
}

fn strip(m: usize, i: usize) -> Strip {
    let (a, b) = if i < m {
        (Rat::dyadic(i as u32), Rat::dyadic(i as u32 - 1))
    } else {
        (Rat::zero(), Rat::dyadic(m as u32 - 1))
    };
    let three = Rat::from_int(3);
    Strip {
        lo: (&a * Rat::from_int(2) + &b) / &three,
        hi: (&a + &b * Rat::from_int(2)) / &three,
        beta: Rat::dyadic(i as u32 + 2),
    }
}

/// Squares per group `(A, B, P, Q)` in each strip.
fn counts(m: usize) -> [usize; 4] {
    if m.is_multiple_of(2) {
        [m / 2 + 1, m / 2 + 1, m / 2, m / 2]
    } else {
        let k = m.div_ceil(2);
        [k; 4]
    }
}

fn strip_placements(m: usize, i: usize, e: u32) -> Vec<Placement> {
    let s = strip(m, i);
    let side = &s.beta * Rat::dyadic(e);
    let w = &s.hi - &s.lo;
    let half_beta = &s.beta * Rat::new(1, 2);
    let third = Rat::new(1, 3);
    let mut out = Vec::new();
    for (group, n) in [Group::A, Group::B, Group::P, Group::Q].into_iter().zip(counts(m)) {
        for slot in 0..n {
            let rho = &s.lo + (Rat::from_int(slot as i64) + Rat::new(1, 2)) * &w / Rat::from_int(n as i64);
            let (u, v) = match group {
                Group::A => (&rho - &half_beta, half_beta.clone()),
                Group::B => (half_beta.clone(), &rho - &half_beta),
                Group::P => (&rho * &third * Rat::from_int(2), &rho * &third),
                Group::Q => (&rho * &third, &rho * &third * Rat::from_int(2)),
            };
            out.push(Placement {
                corner: Corner::Upper,
                strip: i,
                group,
                slot,
                u,
                v,
                side: side.clone(),
            });
        }
    }
    out
}

/// Whether every square keeps `rho` on the plateau, stays strictly inside the
/// corner square, and (for A/B) strictly inside its boundary strip.
fn fits(m: usize, i: usize, pls: &[Placement]) -> bool {
    let s = strip(m, i);
    let zero = Rat::zero();
    let one = Rat::one();
    pls.iter().all(|p| {
        let b = p.local_box();
        let (ua, va, ub, vb) = (&b.a().0[0], &b.a().0[1], &b.b().0[0], &b.b().0[1]);
        let rho_lo = ua + va;
        let rho_hi = ub + vb;
        let inside = *ua > zero && *va > zero && *ub < one && *vb < one;
        let edge = match p.group {
            Group::A => *vb < s.beta,
            Group::B => *ub < s.beta,
            _ => true,
        };
        inside && edge && rho_lo >= s.lo && rho_hi <= s.hi
    })
}

impl Layout {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("levels start at 1".into()));
        }
        let mut refinement = vec![0u32; m];
        for i in 1..=m {
            let mut e = 1;
            loop {
                let pls = strip_placements(m, i, e);
                let boxes: Vec<_> = pls.iter().map(Placement::local_box).collect();
                if fits(m, i, &pls) && first_conflict(&boxes, Disjointness::Closed)?.is_none() {
                    break;
                }
                e += 1;
                if e > MAX_REFINEMENT {
                    return Err(Error::Parameter(format!("no child layout for level {m}, strip {i}")));
                }
            }
            refinement[i - 1] = e;
        }
        // Squares of different strips can still meet; refine both strips until they do not.
        let upper = loop {
            let upper: Vec<Placement> = (1..=m)
                .flat_map(|i| strip_placements(m, i, refinement[i - 1]))
                .collect();
            let boxes: Vec<_> = upper.iter().map(Placement::local_box).collect();
            match first_conflict(&boxes, Disjointness::Closed)? {
                None => break upper,
                Some((a, b)) => {
                    for k in [upper[a].strip, upper[b].strip] {
                        refinement[k - 1] += 1;
                        if refinement[k - 1] > MAX_REFINEMENT {
                            return Err(Error::Parameter(format!("no child layout for level {m}")));
                        }
                    }
                }
            }
        };
        let lower = upper.iter().map(|p| Placement {
            corner: Corner::Lower,
            ..p.clone()
        });
        let placements: Vec<Placement> = upper.iter().cloned().chain(lower).collect();
        debug_assert_eq!(placements.len(), 4 * m * (m + 1));
        let approx = placements
            .iter()
            .map(|p| [p.u.to_f64(), p.v.to_f64(), p.side.to_f64() / 2.0])
            .collect();
        let frames = placements
            .iter()
            .map(|p| {
                let (cx, cy) = (&p.u + Rat::one(), &p.v + Rat::one());
                let zoom = Rat::from_int(4) / &p.side;
                match p.corner {
                    Corner::Upper => (cx, cy, zoom),
                    Corner::Lower => (-cx, -cy, zoom),
                }
            })
            .collect();
        Ok(Layout {
            m,
            placements,
            refinement,
            approx,
            frames,
        })
    }

    /// Index of the child of `parent` whose closed square contains `p`.
    pub fn locate(&self, parent: &Square, p: &Point) -> Option<usize> {
        let d = &parent.half * Rat::new(1, 2);
        let x = (&p.0[0] - &parent.center.0[0]) / &d;
        let y = (&p.0[1] - &parent.center.0[1]) / &d;
        self.locate_local(&x, &y)
    }

    /// As `locate`, with `p` given relative to the parent's center in units of `d`.
    pub fn locate_local(&self, x: &Rat, y: &Rat) -> Option<usize> {
        let one = Rat::one();
        let half_count = self.placements.len() / 2;
        let (u, v, offset) = if *x > one && *y > one {
            (x - &one, y - &one, 0)
        } else if *x < -&one && *y < -&one {
            (-x - &one, -y - &one, half_count)
        } else {
            return None;
        };
        let uf = u.to_f64();
        let vf = v.to_f64();
        let half = Rat::new(1, 2);
        self.placements[offset..offset + half_count]
            .iter()
            .zip(&self.approx[offset..offset + half_count])
            .position(|(pl, &[pu, pv, ph])| {
                // Float prefilter with a generous margin, then the exact test.
                let hf = ph + 1e-12;
                if (uf - pu).abs() > hf || (vf - pv).abs() > hf {
                    return false;
                }
                let h = &pl.side * &half;
                (&u - &pl.u).abs() <= h && (&v - &pl.v).abs() <= h
            })
            .map(|j| j + offset)
    }

    /// Local coordinates of a point in child `j`'s frame.
    pub fn to_child(&self, j: usize, x: &Rat, y: &Rat) -> (Rat, Rat) {
        let (cx, cy, zoom) = &self.frames[j];
        ((x - cx) * zoom, (y - cy) * zoom)
    }
}
