use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sums::pairwise_sum;
use crate::error::{Error, Result};
use crate::geometry::{Ball, Interval, Point, Rat};
use crate::zoo::{FunctionSpec, Value};

/// Largest number of probe points a single diagnostic will evaluate.
pub const PROBE_CAP: u128 = 1 << 22;

/// Where to probe a ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Every point of the lattice `center + step * Z^n` inside the ball.
    Grid { step: Rat },
    /// Uniform points of the bounding box that land in the ball.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscBound {
    /// `max - min` of the sampled values, rounded down through their error bounds.
    pub lower: f64,
    pub samples: usize,
    /// Probes dropped because the function has a pole there.
    pub skipped: usize,
    pub argmax: Option<Point>,
    pub argmin: Option<Point>,
}

fn ball_probes(ball: &Ball, sampler: &Sampler) -> Result<Vec<Point>> {
    let n = ball.dim();
    let c = &ball.center;
    match sampler {
        Sampler::Grid { step } => {
            if !step.is_positive() {
                return Err(Error::Parameter(format!("grid step {step} must be positive")));
            }
            let reach = (&ball.radius / step).floor();
            let reach: i64 = reach
                .try_into()
                .map_err(|_| Error::Parameter("grid step too small for the ball".into()))?;
            let per_axis = 2 * reach as u128 + 1;
            let count = per_axis.checked_pow(n as u32).unwrap_or(u128::MAX);
            if count > PROBE_CAP {
                return Err(Error::Capacity {
                    what: "grid probes",
                    count,
                    cap: PROBE_CAP,
                });
            }
            let offsets: Vec<Rat> = (-reach..=reach).map(|k| step * Rat::from_int(k)).collect();
            let mut out = Vec::new();
            let mut idx = vec![0usize; n];
            loop {
                let p = Point(idx.iter().zip(&c.0).map(|(&i, ci)| ci + &offsets[i]).collect());
                if ball.contains(&p) {
                    out.push(p);
                }
                let mut axis = 0;
                while axis < n {
                    idx[axis] += 1;
                    if idx[axis] < offsets.len() {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
                if axis == n {
                    break;
                }
            }
            Ok(out)
        }
        Sampler::Random { count, seed } => {
            if *count as u128 > PROBE_CAP {
                return Err(Error::Capacity {
                    what: "random probes",
                    count: *count as u128,
                    cap: PROBE_CAP,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let scale = Rat::dyadic(31);
            let mut out = Vec::with_capacity(*count);
            for _ in 0..*count {
                // c + r (k / 2^31 - 1) with k uniform in [0, 2^32]
                let p = Point(
                    c.0.iter()
                        .map(|ci| {
                            let k = rng.random_range(0..=1i64 << 32);
                            ci + &ball.radius * (Rat::from_int(k) * &scale - Rat::one())
                        })
                        .collect(),
                );
                if ball.contains(&p) {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

/// Certified lower bound on `osc(f, ball)` from the sampled values.
pub fn osc_on_ball(spec: &FunctionSpec, ball: &Ball, sampler: &Sampler) -> Result<OscBound> {
    if ball.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: ball.dim(),
        });
    }
    let probes = ball_probes(ball, sampler)?;
    let values: Vec<Option<Value>> = probes
        .par_iter()
        .map(|p| match spec.eval(p) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Pole(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut hi: Option<(f64, usize)> = None;
    let mut lo: Option<(f64, usize)> = None;
    let mut skipped = 0;
    for (i, v) in values.iter().enumerate() {
        let Some(v) = v else {
            skipped += 1;
            continue;
        };
        let slack = v.err + 2.0 * f64::EPSILON * v.approx.abs();
        let (down, up) = (v.approx - slack, v.approx + slack);
        if hi.is_none_or(|(h, _)| down > h) {
            hi = Some((down, i));
        }
        if lo.is_none_or(|(l, _)| up < l) {
            lo = Some((up, i));
        }
    }
    let (lower, argmax, argmin) = match (hi, lo) {
        (Some((h, i)), Some((l, j))) => ((h - l).max(0.0), Some(probes[i].clone()), Some(probes[j].clone())),
        _ => (0.0, None, None),
    };
    Ok(OscBound {
        lower,
        samples: values.len() - skipped,
        skipped,
        argmax,
        argmin,
    })
}

/// Outcome label of a diagnostic sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFlag {
    FiniteEstimate,
    Diverging,
    Converged,
    NonConverged,
    Stable,
    DivergenceSuspected,
}

impl fmt::Display for ScanFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanFlag::FiniteEstimate => "finite-estimate",
            ScanFlag::Diverging => "diverging",
            ScanFlag::Converged => "converged",
            ScanFlag::NonConverged => "non-converged",
            ScanFlag::Stable => "stable",
            ScanFlag::DivergenceSuspected => "divergence-suspected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub scale: f64,
    pub estimate: f64,
}

/// A raw estimate sequence and the heuristic reading of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub rows: Vec<ScanRow>,
    pub flag: ScanFlag,
    pub notes: Vec<String>,
}

impl Scan {
    pub fn last(&self) -> Option<f64> {
        self.rows.last().map(|r| r.estimate)
    }

    /// `scale estimate flag` with a header row.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "scale\testimate\tflag")?;
        for r in &self.rows {
            writeln!(w, "{:e}\t{:e}\t{}", r.scale, r.estimate, self.flag)?;
        }
        Ok(())
    }
}

fn dyadic_schedule(exponents: impl Iterator<Item = u32>) -> Vec<Rat> {
    exponents.map(Rat::dyadic).collect()
}

/// Radii `2^-4, 2^-8, ..., 2^-48`.
pub fn default_lip_radii() -> Vec<Rat> {
    dyadic_schedule((1..=12).map(|j| 4 * j))
}

/// Steps `3^-3, ..., 3^-19`. A ratio that is not a power of two keeps the
/// stencil from realigning with periodic binary expansions, where Takagi-type
/// difference quotients would repeat and fake convergence.
pub fn default_steps() -> Vec<Rat> {
    (3..=19).map(|k| Rat::new(1, 3).pow(k)).collect()
}

fn check_schedule(schedule: &[Rat], what: &str) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Parameter(format!("{what} schedule is empty")));
    }
    if schedule.iter().any(|r| !r.is_positive()) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter(format!("{what} schedule must be positive and strictly decreasing")));
    }
    Ok(())
}

/// Unit directions: the circle at `count` equal angles in the plane; the
/// coordinate axes, the sign diagonals and seeded random directions otherwise.
fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if n == 2 {
        return (0..count)
            .map(|j| {
                let th = std::f64::consts::TAU * j as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect();
    }
    let mut out = Vec::new();
    for axis in 0..n {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[axis] = sign;
            out.push(v);
        }
    }
    if n <= 10 {
        let norm = (n as f64).sqrt();
        for mask in 0..1u32 << n {
            out.push((0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 } / norm).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            out.push(v.iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Magnitudes probed inside each ball, as fractions `j / LIP_SHELLS` of the radius.
pub const LIP_SHELLS: usize = 8;

/// Per-radius maxima of `|f(p+u) - f(p)| / r` over sampled `|u| <= r`.
/// Diverging when the largest estimate over the finer half of the schedule
/// is at least `factor` times the smallest over the coarser half; Takagi-type
/// quotients wander, so single rows are not compared.
pub fn lip_at(spec: &FunctionSpec, p: &Point, radii: &[Rat], samples: usize, factor: f64) -> Result<Scan> {
    check_schedule(radii, "radius")?;
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample per radius".into()));
    }
    let center = spec.eval(p)?;
    let dirs = directions(p.dim(), samples);
    let probes: Vec<(&Vec<f64>, usize)> = dirs.iter().flat_map(|d| (1..=LIP_SHELLS).map(move |j| (d, j))).collect();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for r in radii {
        let rf = r.to_f64();
        let ratios: Vec<Option<f64>> = probes
            .par_iter()
            .map(|&(dir, j)| {
                let len = rf * j as f64 / LIP_SHELLS as f64;
                let u: Vec<Rat> = dir
                    .iter()
                    .map(|x| Rat::from_f64(x * len).expect("finite direction"))
                    .collect();
                let q = Point(p.0.iter().zip(&u).map(|(a, b)| a + b).collect());
                match spec.eval(&q) {
                    Ok(v) => Ok(Some(v.sub(&center).abs().approx / rf)),
                    Err(Error::Pole(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        skipped += ratios.iter().filter(|x| x.is_none()).count();
        let best = ratios.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        rows.push(ScanRow { scale: rf, estimate: best });
    }
    let diverging = rows.len() >= 2 && {
        let (coarse, fine) = rows.split_at(rows.len() / 2);
        let low = coarse.iter().map(|r| r.estimate).fold(f64::INFINITY, f64::min);
        let high = fine.iter().map(|r| r.estimate).fold(0.0, f64::max);
        high > 0.0 && high >= factor * low
    };
    let mut notes = vec![format!(
        "{} directions x {LIP_SHELLS} magnitudes per radius, growth factor {factor}",
        dirs.len()
    )];
    if skipped > 0 {
        notes.push(format!("{skipped} probes skipped at poles"));
    }
    Ok(Scan {
        rows,
        flag: if diverging {
            ScanFlag::Diverging
        } else {
            ScanFlag::FiniteEstimate
        },
        notes,
    })
}

/// Default relative tolerance of `dir_derivative`.
pub const DIR_TOL: f64 = 1e-6;

/// Central differences `(f(p + h w) - f(p - h w)) / (2 h |w|)` over the step
/// schedule. Converged when the last two successive changes are within `tol`
/// relative to the estimates.
pub fn dir_derivative(spec: &FunctionSpec, p: &Point, w: &[Rat], steps: &[Rat], tol: f64) -> Result<Scan> {
    check_schedule(steps, "step")?;
    if w.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: w.len(),
        });
    }
    let norm = w.iter().map(|x| x * x).sum::<Rat>().to_f64().sqrt();
    if norm == 0.0 {
        return Err(Error::Parameter("direction must be nonzero".into()));
    }
    let rows: Vec<ScanRow> = steps
        .par_iter()
        .map(|h| {
            let shift = Point(w.iter().map(|x| x * h).collect());
            let diff = spec.eval(&p.add(&shift))?.sub(&spec.eval(&p.sub(&shift))?);
            let quotient = match diff.as_exact() {
                Some(r) => (r / (h * Rat::from_int(2))).to_f64(),
                None => diff.approx / (2.0 * h.to_f64()),
            };
            Ok(ScanRow {
                scale: h.to_f64(),
                estimate: quotient / norm,
            })
        })
        .collect::<Result<_>>()?;
    let k = rows.len();
    let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300);
    let converged = k >= 3 && (k - 2..k).all(|i| close(rows[i].estimate, rows[i - 1].estimate));
    Ok(Scan {
        rows,
        flag: if converged {
            ScanFlag::Converged
        } else {
            ScanFlag::NonConverged
        },
        notes: vec![format!("relative tolerance {tol:e}")],
    })
}

/// Finest grid `dirichlet_energy` will build.
pub const MAX_ENERGY_LEVEL: usize = 11;

/// Grid energy on `2^j x 2^j` cells for `j = 1..=levels`, each cell split into
/// two triangles carrying the gradient of the linear interpolant. Cells touching
/// a pole are dropped. Divergence is suspected when the last refinement grows
/// the energy by `factor` or more.
pub fn dirichlet_energy(spec: &FunctionSpec, rect: &Interval, levels: usize, factor: f64) -> Result<Scan> {
    if spec.dim() != 2 || rect.dim() != 2 {
        return Err(Error::MethodMismatch("dirichlet energy is implemented on planar rectangles".into()));
    }
    if levels == 0 || levels > MAX_ENERGY_LEVEL {
        return Err(Error::Parameter(format!("levels must lie in 1..={MAX_ENERGY_LEVEL}")));
    }
    if rect.is_degenerate() {
        return Err(Error::Parameter("rectangle is degenerate".into()));
    }
    let sides: Vec<Rat> = rect.sides().collect();
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for j in 1..=levels {
        let cells = 1usize << j;
        let steps: Vec<Rat> = sides.iter().map(|s| s / Rat::from_int(cells as i64)).collect();
        let (hx, hy) = (steps[0].to_f64(), steps[1].to_f64());
        let grid: Vec<Vec<Option<f64>>> = (0..=cells)
            .into_par_iter()
            .map(|iy| {
                let y = &rect.a().0[1] + &steps[1] * Rat::from_int(iy as i64);
                (0..=cells)
                    .map(|ix| {
                        let x = &rect.a().0[0] + &steps[0] * Rat::from_int(ix as i64);
                        match spec.eval(&Point(vec![x, y.clone()])) {
                            Ok(v) => Ok(Some(v.approx)),
                            Err(Error::Pole(_)) => Ok(None),
                            Err(e) => Err(e),
                        }
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let per_cell: Vec<Option<f64>> = (0..cells)
            .into_par_iter()
            .flat_map_iter(|iy| {
                let grid = &grid;
                (0..cells).map(move |ix| {
                    let f00 = grid[iy][ix]?;
                    let f10 = grid[iy][ix + 1]?;
                    let f01 = grid[iy + 1][ix]?;
                    let f11 = grid[iy + 1][ix + 1]?;
                    let lower = ((f10 - f00) / hx).powi(2) + ((f01 - f00) / hy).powi(2);
                    let upper = ((f11 - f01) / hx).powi(2) + ((f11 - f10) / hy).powi(2);
                    Some((lower + upper) * hx * hy / 2.0)
                })
            })
            .collect();
        let excluded = per_cell.iter().filter(|c| c.is_none()).count();
        if excluded == per_cell.len() {
            return Err(Error::NoCells(format!("every cell at level {j} touches a pole")));
        }
        if excluded > 0 {
            notes.push(format!("level {j}: {excluded} of {} cells excluded at poles", per_cell.len()));
        }
        let kept: Vec<f64> = per_cell.into_iter().flatten().collect();
        rows.push(ScanRow {
            scale: 1.0 / cells as f64,
            estimate: pairwise_sum(&kept),
        });
    }
    let k = rows.len();
    let suspected = k >= 2 && rows[k - 1].estimate >= factor * rows[k - 2].estimate && rows[k - 1].estimate > 0.0;
    Ok(Scan {
        rows,
        flag: if suspected {
            ScanFlag::DivergenceSuspected
        } else {
            ScanFlag::Stable
        },
        notes,
    })
}
