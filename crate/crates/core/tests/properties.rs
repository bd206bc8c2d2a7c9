use aclab_core::checkers::{osc_on_ball, violation_sums, Sampler};
use aclab_core::witness::{greedy_search, oracle_max, Sampling, SearchBudget, DEFAULT_ORACLE_CAP};
use aclab_core::zoo::dsl::parse;
use aclab_core::{AcClassSpec, Ball, BallShape, Disjointness, FunctionSpec, Point, Rat, Span};
use proptest::prelude::*;

fn rat(den: i64) -> impl Strategy<Value = Rat> {
    (-6 * den / 5..=6 * den / 5).prop_map(move |k| Rat::new(k, den))
}

/// Squares differenced from lower to upper corner, kept only while disjoint.
fn square_family() -> impl Strategy<Value = Vec<Span>> {
    proptest::collection::vec((rat(1024), rat(1024), 1i64..=256), 1..10).prop_map(|raw| {
        let mut out: Vec<Span> = Vec::new();
        for (x, y, k) in raw {
            let side = Rat::new(k, 1024);
            let a = Point(vec![x, y]);
            let b = Point(a.0.iter().map(|c| c + &side).collect());
            let span = Span { a, b };
            let iv = span.interval();
            if out.iter().all(|s| !s.interval().meets(&iv, Disjointness::Closed)) {
                out.push(span);
            }
        }
        out
    })
}

fn exact_osc(spec: &FunctionSpec, fam: &[Span], class: &AcClassSpec) -> (Rat, Rat) {
    let s = violation_sums(spec, fam, class, Disjointness::Closed).unwrap();
    (s.sum_osc.as_exact().cloned().unwrap(), s.sum_measure)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lipschitz_product_obeys_the_square_bound(fam in square_family()) {
        let f = parse("preset:tent-product").unwrap();
        let (osc, meas) = exact_osc(&f, &fam, &AcClassSpec::one_ac(2));
        prop_assert!(osc <= Rat::from_int(4) * meas);
    }

    #[test]
    fn sums_are_additive_over_split_families(fam in square_family(), cut in 0usize..10) {
        let f = parse("product(h=const:1,g=pwl:-1/2@0;0@1;1/2@0,d=1/2)").unwrap();
        let class = AcClassSpec::one_ac(2);
        let cut = cut.min(fam.len());
        let (left, right) = fam.split_at(cut);
        let (o, m) = exact_osc(&f, &fam, &class);
        let (o1, m1) = exact_osc(&f, left, &class);
        let (o2, m2) = exact_osc(&f, right, &class);
        prop_assert_eq!(o, o1 + o2);
        prop_assert_eq!(m, m1 + m2);
    }

    #[test]
    fn scaling_the_function_scales_the_sum(fam in square_family(), c in -8i64..=8) {
        let f = FunctionSpec::affine(vec![Rat::new(1, 3), Rat::from_int(-2)], Rat::one());
        let class = AcClassSpec::one_ac(2);
        let (o, _) = exact_osc(&f, &fam, &class);
        let c = Rat::new(c, 4);
        let (oc, _) = exact_osc(&f.clone().scale(c.clone()), &fam, &class);
        prop_assert_eq!(oc, c.pow(2) * o);
    }

    #[test]
    fn ball_oscillation_grows_with_radius(cx in rat(64), cy in rat(64), k in 1i64..=16, extra in 0i64..=16) {
        let f = parse("preset:takagi-tent").unwrap();
        let center = Point(vec![cx, cy]);
        let step = Rat::new(1, 128);
        let sampler = Sampler::Grid { step: step.clone() };
        let small = Ball::new(center.clone(), &step * Rat::from_int(k), BallShape::Euclidean).unwrap();
        let large = Ball::new(center, &step * Rat::from_int(k + extra), BallShape::Euclidean).unwrap();
        let a = osc_on_ball(&f, &small, &sampler).unwrap();
        let b = osc_on_ball(&f, &large, &sampler).unwrap();
        prop_assert!(b.lower >= a.lower);
        prop_assert!(b.samples >= a.samples);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn greedy_never_beats_the_oracle(
        coeffs in (-3i64..=3, -3i64..=3),
        which in 0usize..3,
        r in 1u32..=2,
        k in 1usize..=2,
        num in 1i64..=8,
        seed in 0u64..100,
    ) {
        let spec = match which {
            0 => FunctionSpec::affine(vec![Rat::from_int(coeffs.0), Rat::from_int(coeffs.1)], Rat::zero()),
            1 => parse("preset:cbrt-product").unwrap(),
            _ => parse("preset:w11-not-w12").unwrap(),
        };
        let class = AcClassSpec::one_ac(2);
        let delta = Rat::new(num, 16);
        let oracle = oracle_max(&spec, &class, &delta, None, r, k, None, DEFAULT_ORACLE_CAP).unwrap();
        let budget = SearchBudget {
            sampling: Sampling::Grid { r },
            max_family: Some(k),
            seed,
            ..SearchBudget::default()
        };
        let greedy = greedy_search(&spec, &class, &delta, None, &budget, None).unwrap();
        prop_assert!(greedy.osc_value() <= oracle.osc_value() * (1.0 + 1e-12) + 1e-12);
        prop_assert!(greedy.sum_measure < delta);
    }
}
