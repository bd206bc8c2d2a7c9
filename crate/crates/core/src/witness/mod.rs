//! Refutation witnesses: the analytic constructions, a seeded greedy search,
//! an exhaustive oracle over dyadic grids, and the Cantor cover check.

mod analytic;
mod luzin;
mod search;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checkers::{check_family, AcClassSpec};
use crate::error::Result;
use crate::geometry::{Disjointness, Interval, Point, Rat, Span};
use crate::zoo::FunctionSpec;

pub use analytic::{
    product_growth, refute_0ac, refute_half_ac, refute_product_1ac, refute_strong0ac, HalfAcOptions, ProductOptions,
    ZeroAcOptions,
};
pub use luzin::{luzin_cover, LuzinCheck};
pub use search::{greedy_search, oracle_max, CandidateSpace, Sampling, SearchBudget, DEFAULT_ORACLE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Violates,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Violates => "violates",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// Oscillation contributed by one hierarchy level of a family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTerm {
    pub level: usize,
    pub count: u128,
    /// `sum (f_m(a) - f_m(b))^2` over the level's intervals, using `f_m` alone.
    pub osc: Rat,
    pub expected: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub class: AcClassSpec,
    pub delta: Rat,
    pub epsilon: Rat,
    pub family: Vec<Span>,
    pub sum_measure: Rat,
    pub sum_osc: f64,
    pub sum_osc_exact: Option<Rat>,
    pub sum_osc_err: f64,
    pub verdict: Outcome,
    pub method: String,
    pub seed: Option<u64>,
    pub disjointness: Disjointness,
    pub spec: String,
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelTerm>,
    pub notes: Vec<String>,
}

impl WitnessReport {
    pub fn violates(&self) -> bool {
        self.verdict == Outcome::Violates
    }

    /// The exact oscillation sum when there is one, its float otherwise.
    pub fn osc_value(&self) -> f64 {
        self.sum_osc_exact.as_ref().map_or(self.sum_osc, Rat::to_f64)
    }
}

/// Everything a refuter knows besides the family itself.
pub(crate) struct Draft {
    pub class: AcClassSpec,
    pub delta: Rat,
    pub epsilon: Rat,
    pub method: String,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl Draft {
    pub fn new(class: AcClassSpec, delta: Rat, epsilon: Rat, method: &str) -> Self {
        Draft {
            class,
            delta,
            epsilon,
            method: method.to_string(),
            seed: None,
            params: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Re-verifies the family from scratch and packages the outcome. This is
    /// the only way a report is built, so a "violates" verdict always rests on
    /// exact disjointness, exact regularity and an exact measure sum.
    pub fn finish(self, spec: &FunctionSpec, family: Vec<Span>) -> Result<WitnessReport> {
        let mode = Disjointness::Closed;
        let v = check_family(spec, &family, &self.class, &self.delta, &self.epsilon, mode)?;
        let mut notes = self.notes;
        notes.extend(v.notes);
        Ok(WitnessReport {
            class: self.class,
            delta: self.delta,
            epsilon: self.epsilon,
            family,
            sum_measure: v.sum_measure,
            sum_osc: v.sum_osc.approx,
            sum_osc_exact: v.sum_osc.as_exact().cloned(),
            sum_osc_err: v.sum_osc.err,
            verdict: if v.passes {
                Outcome::Inconclusive
            } else {
                Outcome::Violates
            },
            method: self.method,
            seed: self.seed,
            disjointness: mode,
            spec: spec.to_string(),
            params: self.params,
            levels: Vec::new(),
            notes,
        })
    }
}

/// The region searches and oracles work in when none is given: the square
/// holding the support for the diamond-supported functions, the root square
/// for the hierarchy, the unit cube otherwise.
pub fn natural_domain(spec: &FunctionSpec) -> Interval {
    let cube = |lo: Rat, hi: Rat, n: usize| {
        Interval::new(Point(vec![lo; n]), Point(vec![hi; n])).expect("lo < hi")
    };
    match spec {
        FunctionSpec::Product { d, .. } | FunctionSpec::TakagiTent { d, .. } => {
            let r = d * Rat::from_int(2);
            cube(-&r, r, 2)
        }
        FunctionSpec::Hierarchy { hierarchy, .. } => hierarchy.root().interval(),
        FunctionSpec::Scale { inner, .. } => natural_domain(inner),
        other => cube(Rat::zero(), Rat::one(), other.dim()),
    }
}

/// A rational not above `x`, for turning float lower bounds into thresholds.
pub(crate) fn rat_below(x: f64) -> Rat {
    if x.is_nan() || x <= 0.0 {
        return Rat::zero();
    }
    Rat::from_f64(x * (1.0 - 1e-12)).unwrap_or_else(Rat::zero)
}
