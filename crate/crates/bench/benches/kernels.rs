use std::hint::black_box;
use std::sync::Arc;

use aclab_core::checkers::{dirichlet_energy, violation_sums};
use aclab_core::hierarchy::{Hierarchy, DEFAULT_SQUARE_CAP};
use aclab_core::witness::{greedy_search, oracle_max, refute_product_1ac, ProductOptions, SearchBudget, DEFAULT_ORACLE_CAP};
use aclab_core::zoo::{cantor, dsl::parse, takagi};
use aclab_core::{AcClassSpec, Disjointness, Rat};
use criterion::{criterion_group, criterion_main, Criterion};

fn evaluation(c: &mut Criterion) {
    let x = Rat::new(3, 7);
    c.bench_function("takagi 64 terms", |b| b.iter(|| takagi(black_box(&x), 64)));
    let y = Rat::new(19, 80);
    c.bench_function("cantor periodic", |b| b.iter(|| cantor(black_box(&y)).unwrap()));

    let h = Arc::new(Hierarchy::build_unit(4, DEFAULT_SQUARE_CAP).unwrap());
    let p = h.squares(4).unwrap()[1234].peak();
    c.bench_function("hierarchy partial sum depth 4", |b| b.iter(|| h.eval_partial(black_box(&p), 4).unwrap()));
}

fn families(c: &mut Criterion) {
    let cbrt = parse("preset:cbrt-product").unwrap();
    let rep = refute_product_1ac(&cbrt, &ProductOptions::new(Rat::new(1, 100), 1000)).unwrap();
    let one = AcClassSpec::one_ac(2);
    c.bench_function("violation sums, 1000 squares", |b| {
        b.iter(|| violation_sums(&cbrt, black_box(&rep.family), &one, Disjointness::Closed).unwrap())
    });

    let x = parse("affine:x+2y").unwrap();
    c.bench_function("oracle r=2 k=2", |b| {
        b.iter(|| oracle_max(&x, &one, &Rat::new(1, 10), None, 2, 2, None, DEFAULT_ORACLE_CAP).unwrap())
    });

    let budget = SearchBudget {
        candidates: 2000,
        iterations: 2000,
        ..SearchBudget::default()
    };
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("greedy cbrt-product", |b| {
        b.iter(|| greedy_search(&cbrt, &one, &Rat::new(1, 100), None, &budget, None).unwrap())
    });
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let w = parse("preset:w11-not-w12").unwrap();
    let rect = "0,0:1,1".parse().unwrap();
    let mut group = c.benchmark_group("diagnostics");
    group.sample_size(10);
    group.bench_function("energy 6 levels", |b| b.iter(|| dirichlet_energy(&w, &rect, 6, 1.2).unwrap()));
    group.finish();
}

criterion_group!(benches, evaluation, families, diagnostics);
criterion_main!(benches);
