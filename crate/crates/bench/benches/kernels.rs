use std::hint::black_box;

use bicomb::flow::{fs_distance, Trail};
use bicomb::h2::{distance, h2_geodesic, holonomy_check};
use bicomb::tight_span::{four_point_delta, project_extremal, random_admissible, AdmissibleFunction};
use bicomb::{rng, H2Space, SL2Space};
use bicomb_bench::{graph, h2_pairs, model_pairs};
use criterion::{criterion_group, criterion_main, Criterion};

fn h2(c: &mut Criterion) {
    let pairs = h2_pairs(64, 4.0);
    c.bench_function("h2_distance_64", |b| {
        b.iter(|| pairs.iter().map(|(p, q)| distance(black_box(p), black_box(q))).sum::<f64>())
    });
    c.bench_function("h2_geodesic_64", |b| {
        b.iter(|| pairs.iter().map(|(p, q)| h2_geodesic(black_box(p), black_box(q), 0.3).y).sum::<f64>())
    });
    let (p, q) = pairs[0];
    let r = pairs[1].0;
    c.bench_function("holonomy_1e4", |b| b.iter(|| holonomy_check(&p, &q, &r, 10_000).unwrap().residual));
}

fn model(c: &mut Criterion) {
    let space = SL2Space::default();
    let pairs = model_pairs(16, &space);
    c.bench_function("sl2_distance_16", |b| {
        b.iter(|| pairs.iter().map(|(p, q)| bicomb::BicombingSpace::dist(&space, p, q)).sum::<f64>())
    });
}

fn flow(c: &mut Criterion) {
    let pairs = h2_pairs(4, 3.0);
    let c1 = Trail::new(&H2Space, pairs[0].0, pairs[0].1, 0.5);
    let c2 = Trail::new(&H2Space, pairs[1].0, pairs[1].1, -1.0);
    c.bench_function("fs_distance_h2", |b| b.iter(|| fs_distance(&H2Space, &c1, &c2, 1e-8).unwrap().value));
}

fn tight_span(c: &mut Criterion) {
    let d = graph(10, 8);
    c.bench_function("four_point_delta_10", |b| b.iter(|| four_point_delta(black_box(&d))));
    let mut r = rng::stream(109, 0);
    let g: AdmissibleFunction = random_admissible(&d, &mut r);
    c.bench_function("project_extremal_10", |b| b.iter(|| project_extremal(&g, &d, 1e-12, 10_000).unwrap()));
}

criterion_group!(benches, h2, model, flow, tight_span);
criterion_main!(benches);
