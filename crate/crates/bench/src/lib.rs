//! Benchmark fixtures shared by the criterion benches.

use bicomb::h2::random_point;
use bicomb::rng;
use bicomb::tight_span::{graph_metric, random_connected_graph, FiniteMetric};
use bicomb::{BicombingSpace, H2Point, SL2Space, SLPoint};

/// Pairs of hyperbolic points within distance `scale` of `i`.
pub fn h2_pairs(n: usize, scale: f64) -> Vec<(H2Point, H2Point)> {
    (0..n as u64)
        .map(|i| {
            let mut r = rng::stream(101, i);
            (random_point(&mut r, &H2Point::ORIGIN, scale), random_point(&mut r, &H2Point::ORIGIN, scale))
        })
        .collect()
}

pub fn model_pairs(n: usize, space: &SL2Space) -> Vec<(SLPoint, SLPoint)> {
    (0..n as u64)
        .map(|i| {
            let mut r = rng::stream(103, i);
            (space.sample(&mut r, 2.0), space.sample(&mut r, 2.0))
        })
        .collect()
}

/// A connected unit-weight graph metric on `n` vertices.
pub fn graph(n: usize, extra: usize) -> FiniteMetric {
    let mut r = rng::stream(107, n as u64);
    graph_metric(n, &random_connected_graph(n, extra, &mut r)).expect("connected")
}
