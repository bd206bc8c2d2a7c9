use std::sync::Arc;

use aclab_core::hierarchy::{Hierarchy, DEFAULT_SQUARE_CAP};
use aclab_core::witness::{
    greedy_search, oracle_max, product_growth, refute_0ac, refute_half_ac, refute_product_1ac, refute_strong0ac,
    HalfAcOptions, ProductOptions, Sampling, SearchBudget, ZeroAcOptions, DEFAULT_ORACLE_CAP,
};
use aclab_core::zoo::dsl::parse;
use aclab_core::{AcClassSpec, Error, FunctionSpec, Outcome, Point, Rat, Span};

fn r(s: &str) -> Rat {
    s.parse().unwrap()
}

fn pt(s: &str) -> Point {
    Point(s.split(',').map(r).collect())
}

fn x_coord() -> FunctionSpec {
    FunctionSpec::coordinate(2, 0)
}

#[test]
fn thin_interval_for_the_coordinate_function() {
    let rep = refute_strong0ac(&x_coord(), &pt("0,0"), &pt("1,0"), &r("1e-4"), None).unwrap();
    assert_eq!(rep.family, vec![Span { a: pt("0,0"), b: pt("1,5e-5") }]);
    assert_eq!(rep.sum_measure, r("5e-5"));
    assert_eq!(rep.sum_osc_exact, Some(Rat::one()));
    assert_eq!(rep.verdict, Outcome::Violates);
    assert_eq!(rep.method, "analytic:strong0ac");

    let rep = refute_strong0ac(&x_coord(), &pt("0,0"), &pt("1,0"), &r("1e-6"), None).unwrap();
    assert_eq!(rep.sum_measure, r("5e-7"));
    assert_eq!(rep.sum_osc_exact, Some(Rat::one()));
}

#[test]
fn thin_interval_rejects_bad_pairs() {
    let c = FunctionSpec::constant(2, Rat::one());
    let err = refute_strong0ac(&c, &pt("0,0"), &pt("1,0"), &r("1e-4"), None).unwrap_err();
    assert!(matches!(err, Error::NotWitnessPair(_)));
    let err = refute_strong0ac(&x_coord(), &pt("0,0"), &pt("1,1"), &r("1e-4"), None).unwrap_err();
    assert!(matches!(err, Error::NotWitnessPair(_)));
}

#[test]
fn steep_pair_on_square_root_ridge() {
    let f = parse("ridge(axis=0,p=sqrt,n=2)").unwrap();
    let h = r("1/100");
    let opts = ZeroAcOptions::new(h.recip(), r("1e-4"));
    let rep = refute_0ac(&f, &Point(vec![h.pow(2), Rat::zero()]), &pt("0,0"), &opts).unwrap();
    assert!(rep.violates());
    assert!(rep.osc_value() >= 1.0 / 27.0);
    assert!(rep.sum_measure < r("1e-4"));
    assert_eq!(rep.epsilon, Rat::new(1, 27));
}

#[test]
fn steep_pair_on_cube_root_product() {
    let f = parse("preset:cbrt-product").unwrap();
    // |f(u,0) - f(0,0)| = (u/2)^(1/3), far above 1000 u for u = 1e-5.
    let opts = ZeroAcOptions::new(Rat::from_int(1000), r("1e-4"));
    let rep = refute_0ac(&f, &pt("1e-5,0"), &pt("0,0"), &opts).unwrap();
    assert!(rep.violates(), "{:?}", rep.notes);
}

#[test]
fn steep_pair_precondition() {
    // A Lipschitz function with constant 1 has no pair of ratio 2.
    let opts = ZeroAcOptions::new(Rat::from_int(2), r("1e-4"));
    let err = refute_0ac(&x_coord(), &pt("1/2,0"), &pt("0,0"), &opts).unwrap_err();
    assert!(matches!(err, Error::NotWitnessPair(_)), "{err}");
}

#[test]
fn stacked_squares_match_closed_form() {
    let f = parse("preset:cbrt-product").unwrap();
    let mut opts = ProductOptions::new(r("0.01"), 1000);
    opts.tau = Some(r("1/2000"));
    let rep = refute_product_1ac(&f, &opts).unwrap();
    // Each square contributes (tau^(1/3))^2.
    let expected = 1000.0 * (1.0f64 / 2000.0).powf(2.0 / 3.0);
    assert!((rep.osc_value() - expected).abs() < 1e-9 * expected, "{}", rep.osc_value());
    assert_eq!(rep.sum_measure, r("1/4000"));
    assert!(rep.violates());

    let mut opts = ProductOptions::new(r("0.01"), 8000);
    opts.tau = Some(r("1/16000"));
    let rep = refute_product_1ac(&f, &opts).unwrap();
    assert!((rep.osc_value() - 12.6).abs() < 0.05, "{}", rep.osc_value());
}

#[test]
fn stacked_squares_grow_with_k() {
    let f = parse("preset:cbrt-product").unwrap();
    let rows = product_growth(&f, &[250, 500, 1000, 2000], &r("0.01")).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].1 / w[0].1 >= 2f64.powf(1.0 / 3.0) * 0.95);
    }
}

#[test]
fn stacked_squares_blocked_by_lipschitz_profile() {
    let f = parse("preset:tent-product").unwrap();
    let rep = refute_product_1ac(&f, &ProductOptions::new(r("0.01"), 1000)).unwrap();
    assert_eq!(rep.verdict, Outcome::Inconclusive);
    assert!(rep.osc_value() <= 4.0 * rep.sum_measure.to_f64());
    let err = refute_product_1ac(&x_coord(), &ProductOptions::new(r("0.01"), 10)).unwrap_err();
    assert!(matches!(err, Error::MethodMismatch(_)));
}

#[test]
fn half_regular_refuter_small_levels() {
    let h = Arc::new(Hierarchy::build_unit(4, DEFAULT_SQUARE_CAP).unwrap());
    let opts = |m0, last| HalfAcOptions {
        first_level: m0,
        last_level: last,
        delta: None,
        epsilon: None,
    };
    let rep = refute_half_ac(&h, &opts(2, 4)).unwrap();
    assert_eq!(rep.sum_osc_exact, Some(Rat::new(13, 48)));
    assert!(rep.violates());
    let rep = refute_half_ac(&h, &opts(3, 3)).unwrap();
    assert!(rep.sum_measure < Rat::new(1, 64) * h.root().measure());
    assert_eq!(rep.levels.len(), 1);
    assert_eq!(rep.levels[0].osc, rep.levels[0].expected);

    assert!(matches!(refute_half_ac(&h, &opts(2, 5)), Err(Error::DepthTooSmall { .. })));
    assert!(refute_half_ac(&h, &opts(1, 3)).is_err());
}

fn small_budget(seed: u64) -> SearchBudget {
    SearchBudget {
        candidates: 3000,
        iterations: 3000,
        seed,
        ..SearchBudget::default()
    }
}

#[test]
fn greedy_examples() {
    let one = AcClassSpec::one_ac(2);
    let c = FunctionSpec::constant(2, Rat::one());
    let rep = greedy_search(&c, &one, &r("0.01"), None, &small_budget(1), None).unwrap();
    assert_eq!(rep.verdict, Outcome::Inconclusive);
    assert_eq!(rep.osc_value(), 0.0);

    let cbrt = parse("preset:cbrt-product").unwrap();
    let rep = greedy_search(&cbrt, &one, &r("0.01"), None, &small_budget(1), None).unwrap();
    assert!(rep.violates());
    assert!(rep.osc_value() >= 1.0);

    // |x(b) - x(a)|^2 equals the measure of a square, so the sum stays below delta.
    let rep = greedy_search(&x_coord(), &one, &r("0.01"), None, &small_budget(1), None).unwrap();
    assert_eq!(rep.verdict, Outcome::Inconclusive);
    assert!(rep.osc_value() < 0.01);
}

#[test]
fn greedy_is_deterministic() {
    let cbrt = parse("preset:cbrt-product").unwrap();
    let one = AcClassSpec::one_ac(2);
    let a = greedy_search(&cbrt, &one, &r("0.01"), None, &small_budget(4), None).unwrap();
    let b = greedy_search(&cbrt, &one, &r("0.01"), None, &small_budget(4), None).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.seed, Some(4));
}

#[test]
fn oracle_examples() {
    let one = AcClassSpec::one_ac(2);
    let rep = oracle_max(&x_coord(), &one, &r("0.1"), None, 2, 1, None, DEFAULT_ORACLE_CAP).unwrap();
    assert_eq!(rep.sum_osc_exact, Some(Rat::new(1, 16)));
    assert_eq!(rep.sum_measure, Rat::new(1, 16));

    let c = FunctionSpec::constant(2, Rat::one());
    let rep = oracle_max(&c, &one, &r("0.1"), None, 2, 2, None, DEFAULT_ORACLE_CAP).unwrap();
    assert_eq!(rep.sum_osc_exact, Some(Rat::zero()));

    let tent = parse("preset:tent-product").unwrap();
    let oracle = oracle_max(&tent, &one, &r("0.05"), None, 3, 2, None, DEFAULT_ORACLE_CAP).unwrap();
    let budget = SearchBudget {
        sampling: Sampling::Grid { r: 3 },
        max_family: Some(2),
        ..SearchBudget::default()
    };
    let greedy = greedy_search(&tent, &one, &r("0.05"), None, &budget, None).unwrap();
    assert!(greedy.osc_value() >= 0.9 * oracle.osc_value());
    assert!(greedy.osc_value() <= oracle.osc_value() + 1e-12);
}

#[test]
fn oracle_capacity_error() {
    let one = AcClassSpec::one_ac(2);
    let err = oracle_max(&x_coord(), &one, &r("0.5"), None, 3, 3, None, 1000).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }));
}

#[test]
fn report_json_field_names() {
    let rep = refute_strong0ac(&x_coord(), &pt("0,0"), &pt("1,0"), &r("1e-4"), None).unwrap();
    let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
    for key in ["class", "delta", "epsilon", "family", "sum_measure", "sum_osc", "verdict", "method", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "violates");
    assert_eq!(v["family"][0]["a"][0], "0");
    let back: aclab_core::WitnessReport = serde_json::from_value(v).unwrap();
    assert_eq!(back, rep);
}
