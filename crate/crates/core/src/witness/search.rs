use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{natural_domain, Draft, WitnessReport};
use crate::checkers::{abs_pow, AcClassSpec, ClassKind, MeasureMode};
use crate::error::{Error, Result};
use crate::geometry::{Disjointness, Interval, Point, Rat, Span};
use crate::zoo::{FunctionSpec, Value};

/// Default cap on the number of families the oracle may enumerate.
pub const DEFAULT_ORACLE_CAP: u128 = 100_000_000;

/// Largest candidate pool either search will hold.
const POOL_CAP: u128 = 1 << 22;

/// Random candidates are snapped to this dyadic grid.
const SNAP_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Seeded random candidates refined over several rounds.
    Random,
    /// Every admissible interval with corners on the grid that splits each
    /// side of the domain into `2^r` parts; the oracle's space.
    Grid { r: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub candidates: usize,
    pub iterations: usize,
    /// Sampling rounds; each later round resamples around the best candidates so far.
    pub rounds: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub max_family: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            candidates: 20_000,
            iterations: 20_000,
            rounds: 4,
            seed: 0,
            sampling: Sampling::Random,
            max_family: None,
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    iv: Interval,
    /// The corners that are differenced, after any shrink.
    lo: Vec<f64>,
    hi: Vec<f64>,
    measure: Rat,
    term: f64,
}

impl Candidate {
    fn ratio(&self) -> f64 {
        let m = self.measure.to_f64();
        if m > 0.0 {
            self.term / m
        } else {
            f64::INFINITY
        }
    }

    fn meets(&self, other: &Candidate) -> bool {
        // Floats first; the exact test only when the float boxes come close.
        let apart = self.lo.iter().zip(&self.hi).zip(other.lo.iter().zip(&other.hi)).any(
            |((l1, h1), (l2, h2))| {
                let slack = 1e-12 * (1.0 + l1.abs().max(h1.abs()).max(l2.abs()).max(h2.abs()));
                *h1 + slack < *l2 || *h2 + slack < *l1
            },
        );
        !apart && self.iv.meets(&other.iv, Disjointness::Closed)
    }
}

/// The admissible intervals a search may use, with their scores.
#[derive(Debug, Clone)]
pub struct CandidateSpace {
    pub domain: Interval,
    items: Vec<Candidate>,
}

fn measure_of(iv: &Interval, class: &AcClassSpec) -> Rat {
    match class.measure_mode() {
        MeasureMode::Volume => iv.measure(),
        MeasureMode::MaxSidePow => iv.max_side_pow(class.exponent),
    }
}

fn admissible(iv: &Interval, class: &AcClassSpec) -> bool {
    if iv.is_degenerate() {
        return false;
    }
    match class.regularity_threshold() {
        Some(t) => iv.regularity().map(|r| r >= t).unwrap_or(false),
        None => true,
    }
}

fn interval_class(class: &AcClassSpec) -> Result<()> {
    if class.uses_balls() {
        return Err(Error::MethodMismatch(format!(
            "searches build interval families; class {class} is defined by balls"
        )));
    }
    Ok(())
}

fn eval_or_pole(spec: &FunctionSpec, p: &Point) -> Result<Option<Value>> {
    match spec.eval(p) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Pole(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Scores an interval by `|f(a) - f(b)|^n`; `None` when a corner is a pole.
fn score(spec: &FunctionSpec, class: &AcClassSpec, iv: &Interval) -> Result<Option<Candidate>> {
    let span = Span::from(iv);
    let span = match class.shrink() {
        Some(l) => span.shrink(l)?,
        None => span,
    };
    let (Some(fa), Some(fb)) = (eval_or_pole(spec, &span.a)?, eval_or_pole(spec, &span.b)?) else {
        return Ok(None);
    };
    Ok(Some(Candidate {
        lo: iv.a().to_f64(),
        hi: iv.b().to_f64(),
        measure: measure_of(iv, class),
        term: abs_pow(&fa.sub(&fb), class.exponent).approx,
        iv: iv.clone(),
    }))
}

fn check_domain(spec: &FunctionSpec, domain: &Interval) -> Result<()> {
    if domain.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: domain.dim(),
        });
    }
    if domain.is_degenerate() {
        return Err(Error::Parameter("search domain is degenerate".into()));
    }
    Ok(())
}

impl CandidateSpace {
    /// Every admissible interval with corners on the `2^r` grid of `domain`
    /// and measure below `delta`, in lexicographic corner order.
    pub fn grid(spec: &FunctionSpec, class: &AcClassSpec, domain: &Interval, r: u32, delta: &Rat) -> Result<Self> {
        interval_class(class)?;
        check_domain(spec, domain)?;
        let n = spec.dim();
        let cells = 1u64 << r.min(20);
        let per_axis_pairs = (cells as u128 + 1) * cells as u128 / 2;
        let total = per_axis_pairs.checked_pow(n as u32).unwrap_or(u128::MAX);
        if r > 20 || total > POOL_CAP {
            return Err(Error::Capacity {
                what: "grid candidates",
                count: total,
                cap: POOL_CAP,
            });
        }
        let ticks: Vec<Vec<Rat>> = (0..n)
            .map(|v| {
                let step = (&domain.b().0[v] - &domain.a().0[v]) / Rat::from_int(cells as i64);
                (0..=cells).map(|i| &domain.a().0[v] + &step * Rat::from_int(i as i64)).collect()
            })
            .collect();
        let pairs: Vec<(usize, usize)> = (0..=cells as usize)
            .flat_map(|i| (i + 1..=cells as usize).map(move |j| (i, j)))
            .collect();
        let mut boxes = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let a = Point((0..n).map(|v| ticks[v][pairs[idx[v]].0].clone()).collect());
            let b = Point((0..n).map(|v| ticks[v][pairs[idx[v]].1].clone()).collect());
            let iv = Interval::new(a, b)?;
            if admissible(&iv, class) && measure_of(&iv, class) < *delta {
                boxes.push(iv);
            }
            let mut v = 0;
            while v < n {
                idx[v] += 1;
                if idx[v] < pairs.len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
            if v == n {
                break;
            }
        }
        let items: Vec<Option<Candidate>> = boxes
            .par_iter()
            .map(|iv| score(spec, class, iv))
            .collect::<Result<_>>()?;
        Ok(CandidateSpace {
            domain: domain.clone(),
            items: items.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Side-length factors of a random admissible shape, largest side 1.
fn random_shape(rng: &mut ChaCha8Rng, class: &AcClassSpec, n: usize) -> Vec<f64> {
    let mut shape = vec![1.0; n];
    let long = rng.random_range(0..n);
    for (v, f) in shape.iter_mut().enumerate() {
        if v == long {
            continue;
        }
        *f = match &class.kind {
            ClassKind::AlphaAc(a) => {
                let floor = a.to_f64().powf(1.0 / (n as f64 - 1.0).max(1.0));
                rng.random_range(floor..=1.0)
            }
            ClassKind::OneAc | ClassKind::OneAcH(_) => 1.0,
            _ => 2f64.powf(-rng.random_range(0.0..20.0)),
        };
    }
    shape
}

fn snap(x: f64) -> Rat {
    Rat::new((x * (1u64 << SNAP_BITS) as f64).round() as i64, 1i64 << SNAP_BITS)
}

/// A box with the given lower corner and float sides, snapped, clipped to
/// the domain, and squared up again if snapping broke a cube.
fn make_box(domain: &Interval, lo: &[f64], sides: &[f64], cube: bool) -> Option<Interval> {
    let n = lo.len();
    let dlo = domain.a().to_f64();
    let dhi = domain.b().to_f64();
    let mut a = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let unit = 1.0 / (1u64 << SNAP_BITS) as f64;
    let side0 = sides.iter().cloned().fold(0.0, f64::max);
    for v in 0..n {
        let side = if cube { side0 } else { sides[v] };
        if side < unit || side > dhi[v] - dlo[v] {
            return None;
        }
        let start = lo[v].clamp(dlo[v], dhi[v] - side);
        a.push(snap(start));
        s.push(snap(side).max(Rat::new(1, 1i64 << SNAP_BITS)));
    }
    if cube {
        let m = s.iter().cloned().fold(Rat::zero(), Rat::max);
        s = vec![m; n];
    }
    let b: Vec<Rat> = a.iter().zip(&s).map(|(x, y)| x + y).collect();
    let iv = Interval::new(Point(a), Point(b)).ok()?;
    domain.contains_interval(&iv).then_some(iv)
}

fn random_pool(
    spec: &FunctionSpec,
    class: &AcClassSpec,
    domain: &Interval,
    delta: &Rat,
    budget: &SearchBudget,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Candidate>> {
    let n = spec.dim();
    let cube = matches!(class.kind, ClassKind::OneAc | ClassKind::OneAcH(_));
    let dlo = domain.a().to_f64();
    let dhi = domain.b().to_f64();
    let widest = dlo.iter().zip(&dhi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let rounds = budget.rounds.max(1);
    let per_round = (budget.candidates / rounds).max(1);
    let mut pool: Vec<Candidate> = Vec::new();
    for round in 0..rounds {
        // Draw the boxes sequentially so the stream does not depend on threads.
        let mut boxes = Vec::with_capacity(per_round);
        let parents: Vec<Candidate> = if round == 0 {
            Vec::new()
        } else {
            let mut ranked: Vec<&Candidate> = pool.iter().filter(|c| c.term > 0.0).collect();
            ranked.sort_by(|x, y| y.ratio().total_cmp(&x.ratio()));
            ranked.into_iter().take((per_round / 8).max(16)).cloned().collect()
        };
        for i in 0..per_round {
            let shape = random_shape(rng, class, n);
            let (lo, sides) = if parents.is_empty() {
                let size = widest * 2f64.powf(-rng.random_range(0.0..20.0));
                let sides: Vec<f64> = shape.iter().map(|f| f * size).collect();
                let lo: Vec<f64> = (0..n)
                    .map(|v| dlo[v] + rng.random_range(0.0..1.0) * (dhi[v] - dlo[v] - sides[v]).max(0.0))
                    .collect();
                (lo, sides)
            } else {
                let p = &parents[i % parents.len()];
                let psize = p.lo.iter().zip(&p.hi).map(|(a, b)| b - a).fold(0.0, f64::max);
                let size = psize * 2f64.powf(rng.random_range(-2.0..1.0));
                let sides: Vec<f64> = shape.iter().map(|f| f * size).collect();
                let lo: Vec<f64> = (0..n)
                    .map(|v| {
                        let mid = (p.lo[v] + p.hi[v]) / 2.0 + rng.random_range(-1.0..1.0) * psize;
                        mid - sides[v] / 2.0
                    })
                    .collect();
                (lo, sides)
            };
            if let Some(iv) = make_box(domain, &lo, &sides, cube) {
                if admissible(&iv, class) && measure_of(&iv, class) < *delta {
                    boxes.push(iv);
                }
            }
        }
        let scored: Vec<Option<Candidate>> = boxes
            .par_iter()
            .map(|iv| score(spec, class, iv))
            .collect::<Result<_>>()?;
        pool.extend(scored.into_iter().flatten());
    }
    Ok(pool)
}

/// The current family during packing and local search.
struct Packing {
    chosen: Vec<Candidate>,
    measure: Rat,
}

impl Packing {
    fn empty() -> Self {
        Packing {
            chosen: Vec::new(),
            measure: Rat::zero(),
        }
    }

    fn score(&self) -> f64 {
        self.chosen.iter().map(|c| c.term).sum()
    }

    /// Whether `c` fits beside every chosen interval except `skip`.
    fn fits(&self, c: &Candidate, skip: Option<usize>, delta: &Rat) -> bool {
        let freed = skip.map_or_else(Rat::zero, |i| self.chosen[i].measure.clone());
        if &self.measure - &freed + &c.measure >= *delta {
            return false;
        }
        self.chosen
            .iter()
            .enumerate()
            .all(|(j, o)| Some(j) == skip || !o.meets(c))
    }

    fn push(&mut self, c: Candidate) {
        self.measure += &c.measure;
        self.chosen.push(c);
    }

    fn replace(&mut self, i: usize, c: Candidate) {
        self.measure = &self.measure - &self.chosen[i].measure + &c.measure;
        self.chosen[i] = c;
    }

    fn fill(&mut self, pool: &[Candidate], order: &[usize], delta: &Rat, cap: usize) {
        for &i in order {
            if self.chosen.len() >= cap {
                break;
            }
            let c = &pool[i];
            if c.term > 0.0 && self.fits(c, None, delta) {
                self.push(c.clone());
            }
        }
    }
}

fn sorted_by(pool: &[Candidate], key: impl Fn(&Candidate) -> f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    // Stable sort: ties keep pool order.
    order.sort_by(|&a, &b| key(&pool[b]).total_cmp(&key(&pool[a])));
    order
}

/// Drops each chosen interval in turn, refills greedily by raw score, and
/// keeps any refill that scores higher. Repeats until nothing improves.
fn repack(packing: &mut Packing, pool: &[Candidate], by_term: &[usize], delta: &Rat, cap: usize) {
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..packing.chosen.len() {
            let mut trial = Packing::empty();
            for (j, c) in packing.chosen.iter().enumerate() {
                if j != i {
                    trial.push(c.clone());
                }
            }
            let dropped = &packing.chosen[i];
            for &k in by_term {
                if trial.chosen.len() >= cap {
                    break;
                }
                let c = &pool[k];
                if c.term > 0.0 && c.iv != dropped.iv && trial.fits(c, None, delta) {
                    trial.push(c.clone());
                }
            }
            if trial.score() > packing.score() {
                *packing = trial;
                improved = true;
                break;
            }
        }
    }
}

/// Greedy packing of disjoint admissible intervals maximizing the
/// oscillation sum under the measure budget, followed by local search.
/// Deterministic for a fixed seed; the result is re-verified exactly.
pub fn greedy_search(
    spec: &FunctionSpec,
    class: &AcClassSpec,
    delta: &Rat,
    epsilon: Option<Rat>,
    budget: &SearchBudget,
    domain: Option<&Interval>,
) -> Result<WitnessReport> {
    interval_class(class)?;
    if !delta.is_positive() {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let domain = domain.cloned().unwrap_or_else(|| natural_domain(spec));
    check_domain(spec, &domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let pool = match budget.sampling {
        Sampling::Grid { r } => CandidateSpace::grid(spec, class, &domain, r, delta)?.items,
        Sampling::Random => random_pool(spec, class, &domain, delta, budget, &mut rng)?,
    };
    let cap = budget.max_family.unwrap_or(usize::MAX);
    let by_ratio = sorted_by(&pool, Candidate::ratio);
    let by_term = sorted_by(&pool, |c| c.term);
    let mut best = Packing::empty();
    for order in [&by_ratio, &by_term] {
        let mut p = Packing::empty();
        p.fill(&pool, order, delta, cap);
        if p.score() > best.score() {
            best = p;
        }
    }
    let mut packing = best;
    if pool.len().saturating_mul(packing.chosen.len().max(1)) <= 2_000_000 {
        repack(&mut packing, &pool, &by_term, delta, cap);
    }
    if budget.sampling == Sampling::Random && !packing.chosen.is_empty() {
        let cube = matches!(class.kind, ClassKind::OneAc | ClassKind::OneAcH(_));
        for _ in 0..budget.iterations {
            let i = rng.random_range(0..packing.chosen.len());
            let c = &packing.chosen[i];
            let size = c.lo.iter().zip(&c.hi).map(|(a, b)| b - a).fold(0.0, f64::max);
            let grow = 2f64.powf(rng.random_range(-0.5..0.5));
            let sides: Vec<f64> = c.lo.iter().zip(&c.hi).map(|(a, b)| (b - a) * grow).collect();
            let lo: Vec<f64> = c
                .lo
                .iter()
                .zip(&sides)
                .map(|(a, s)| a + rng.random_range(-0.5..0.5) * size.max(*s))
                .collect();
            let Some(iv) = make_box(&domain, &lo, &sides, cube) else {
                continue;
            };
            if !admissible(&iv, class) {
                continue;
            }
            let Some(moved) = score(spec, class, &iv)? else {
                continue;
            };
            if moved.term > packing.chosen[i].term && packing.fits(&moved, Some(i), delta) {
                packing.replace(i, moved);
            }
        }
        // Moves may have freed room.
        packing.fill(&pool, &by_ratio, delta, cap);
    }
    let mut draft = Draft::new(class.clone(), delta.clone(), epsilon.unwrap_or_else(Rat::one), "greedy");
    draft.seed = Some(budget.seed);
    draft.param("candidates", pool.len());
    draft.param("iterations", budget.iterations);
    draft.param("rounds", budget.rounds);
    draft.param(
        "sampling",
        match budget.sampling {
            Sampling::Random => "random".to_string(),
            Sampling::Grid { r } => format!("grid:{r}"),
        },
    );
    draft.param("domain", format!("{}:{}", domain.a(), domain.b()));
    if let Some(k) = budget.max_family {
        draft.param("max_family", k);
    }
    let family = packing.chosen.iter().map(|c| Span::from(&c.iv)).collect();
    draft.finish(spec, family)
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Best family extending `prefix` with indices above `start`.
fn best_extension(
    pool: &[Candidate],
    prefix: &mut Vec<usize>,
    measure: &Rat,
    score: f64,
    k: usize,
    delta: &Rat,
    best: &mut (f64, Vec<usize>),
) {
    if score > best.0 || (score == best.0 && prefix.as_slice() < best.1.as_slice()) {
        *best = (score, prefix.clone());
    }
    if prefix.len() == k {
        return;
    }
    let start = prefix.last().map_or(0, |&i| i + 1);
    for j in start..pool.len() {
        let c = &pool[j];
        let m = measure + &c.measure;
        if m >= *delta || prefix.iter().any(|&i| pool[i].meets(c)) {
            continue;
        }
        prefix.push(j);
        best_extension(pool, prefix, &m, score + c.term, k, delta, best);
        prefix.pop();
    }
}

/// Exhaustive maximum of the oscillation sum over families of at most `k`
/// disjoint admissible grid intervals with measure below `delta`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_max(
    spec: &FunctionSpec,
    class: &AcClassSpec,
    delta: &Rat,
    epsilon: Option<Rat>,
    r: u32,
    k: usize,
    domain: Option<&Interval>,
    cap: u128,
) -> Result<WitnessReport> {
    if !delta.is_positive() {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let domain = domain.cloned().unwrap_or_else(|| natural_domain(spec));
    let space = CandidateSpace::grid(spec, class, &domain, r, delta)?;
    let c = space.items.len() as u128;
    let count: u128 = (0..=k as u128).map(|j| binomial(c, j.min(c))).fold(0, u128::saturating_add);
    if count > cap {
        return Err(Error::Capacity {
            what: "oracle families",
            count,
            cap,
        });
    }
    let pool = &space.items;
    let best = (0..pool.len())
        .into_par_iter()
        .filter(|&i| k > 0 && pool[i].measure < *delta)
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, Vec::new());
            let mut prefix = vec![i];
            best_extension(pool, &mut prefix, &pool[i].measure, pool[i].term, k, delta, &mut best);
            best
        })
        .reduce(
            || (0.0, Vec::new()),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (a.1.is_empty() || (!b.1.is_empty() && b.1 < a.1))) {
                    b
                } else {
                    a
                }
            },
        );
    let mut draft = Draft::new(class.clone(), delta.clone(), epsilon.unwrap_or_else(Rat::one), "oracle");
    draft.param("r", r);
    draft.param("k", k);
    draft.param("candidates", pool.len());
    draft.param("families_bound", count);
    draft.param("domain", format!("{}:{}", domain.a(), domain.b()));
    let family = best.1.iter().map(|&i| Span::from(&pool[i].iv)).collect();
    draft.finish(spec, family)
}
