use std::f64::consts::PI;

use bicomb::h2::*;
use bicomb::rng;

/// Hyperbolic length of the Euclidean straight segment from `a` to `b`.
fn chord_length(a: (f64, f64), b: (f64, f64)) -> f64 {
    let e = (b.0 - a.0).hypot(b.1 - a.1);
    let dy = b.1 - a.1;
    if dy.abs() <= 1e-9 * a.1 {
        e / (0.5 * (a.1 + b.1))
    } else {
        e * (b.1 / a.1).ln() / dy
    }
}

fn polyline_length(pts: &[(f64, f64)]) -> f64 {
    pts.windows(2).map(|w| chord_length(w[0], w[1])).sum()
}

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..60 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Shortest polyline between two points, refined from 2 to 512 segments
/// with coordinate-wise relaxation at each level.
fn discretized_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let mut pts = vec![p, (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)), q];
    loop {
        let h = polyline_length(&pts) / (pts.len() - 1) as f64;
        for _ in 0..40 {
            for i in 1..pts.len() - 1 {
                let (prev, next) = (pts[i - 1], pts[i + 1]);
                let y = pts[i].1;
                let span = 2.0 * h * y;
                let x = golden_min(pts[i].0 - span, pts[i].0 + span, |x| {
                    chord_length(prev, (x, y)) + chord_length((x, y), next)
                });
                let lo = (y - span).max(0.5 * y);
                let y = golden_min(lo, y + span, |y| chord_length(prev, (x, y)) + chord_length((x, y), next));
                pts[i] = (x, y);
            }
        }
        if pts.len() > 512 {
            return polyline_length(&pts);
        }
        let mut finer = Vec::with_capacity(2 * pts.len());
        for w in pts.windows(2) {
            finer.push(w[0]);
            finer.push((0.5 * (w[0].0 + w[1].0), 0.5 * (w[0].1 + w[1].1)));
        }
        finer.push(*pts.last().unwrap());
        pts = finer;
    }
}

#[test]
fn distance_matches_path_minimizer() {
    let p = H2Point::new(0.0, 1.0).unwrap();
    let q = H2Point::new(1.0, 1.0).unwrap();
    let oracle = discretized_distance((0.0, 1.0), (1.0, 1.0));
    assert!((h2_distance(&p, &q).unwrap() - oracle).abs() <= 1e-4, "oracle {oracle}");
    // The midpoint of a symmetric pair is the apex and splits the distance.
    let (a, b) = (H2Point { x: -1.0, y: 1.0 }, H2Point { x: 1.0, y: 1.0 });
    let m = h2_geodesic(&a, &b, 0.5);
    assert!(m.x.abs() <= 1e-12 && (m.y - 2f64.sqrt()).abs() <= 1e-12);
    let half = discretized_distance((-1.0, 1.0), (m.x, m.y));
    assert!((half - 0.5 * distance(&a, &b)).abs() <= 1e-4);
}

#[test]
fn triangle_inequality_and_constant_speed() {
    for i in 0..100_000 {
        let mut r = rng::stream(31, i);
        let [p, q, s] = [0; 3].map(|_| random_point(&mut r, &H2Point::ORIGIN, 4.0));
        let (pq, qs, ps) = (distance(&p, &q), distance(&q, &s), distance(&p, &s));
        assert!(ps <= pq + qs + 1e-12 * (1.0 + ps));
        if i % 10 == 0 {
            let (t, u) = (rng::unit(&mut r), rng::unit(&mut r));
            let d = distance(&h2_geodesic(&p, &q, t), &h2_geodesic(&p, &q, u));
            assert!((d - (t - u).abs() * pq).abs() <= 1e-9);
        }
    }
}

#[test]
fn geodesic_bicombing_is_convex() {
    for i in 0..10_000 {
        let mut r = rng::stream(33, i);
        let [p, q, p2, q2] = [0; 4].map(|_| random_point(&mut r, &H2Point::ORIGIN, 3.0));
        let t = rng::unit(&mut r);
        let lhs = distance(&h2_geodesic(&p, &q, t), &h2_geodesic(&p2, &q2, t));
        assert!(lhs <= (1.0 - t) * distance(&p, &p2) + t * distance(&q, &q2) + 1e-9);
    }
}

/// Interior angle at `p` measured from the tangent directions.
fn measured_angle(p: &H2Point, q: &H2Point, r: &H2Point) -> f64 {
    let mut a = (direction_toward(p, q) - direction_toward(p, r)).abs();
    if a > PI {
        a = 2.0 * PI - a;
    }
    a
}

#[test]
fn equilateral_area_two_ways() {
    let p = H2Point::ORIGIN;
    let q = point_at(&p, 0.3, 1.0);
    // Third vertex: rotate the direction until both sides have length 1.
    let third = |phi: f64| point_at(&p, 0.3 + phi, 1.0);
    let phi = golden_min(0.5, 1.5, |phi| (distance(&third(phi), &q) - 1.0).powi(2));
    let r = third(phi);
    assert!((distance(&q, &r) - 1.0).abs() <= 1e-7);
    let (a, b, c) = (distance(&q, &r), distance(&p, &r), distance(&p, &q));
    let cos_law =
        |a: f64, b: f64, c: f64| ((b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh())).clamp(-1.0, 1.0).acos();
    let by_law = PI - cos_law(a, b, c) - cos_law(b, c, a) - cos_law(c, a, b);
    let by_measure = PI - measured_angle(&p, &q, &r) - measured_angle(&q, &r, &p) - measured_angle(&r, &p, &q);
    let area = triangle_area(&p, &q, &r);
    assert!((area - by_law).abs() <= 1e-9);
    assert!((area - by_measure).abs() <= 1e-9);
}

#[test]
fn g_is_increasing_and_bounded() {
    assert_eq!(max_area_g(0.0).unwrap(), 0.0);
    let grid: Vec<f64> = (0..=1000).map(|k| max_area_g(k as f64 * 0.02).unwrap()).collect();
    assert!(grid.windows(2).all(|w| w[1] > w[0]));
    let far = max_area_g(50.0).unwrap();
    assert!((PI - 1e-9..=PI).contains(&far));
}

#[test]
fn holonomy_equals_area() {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let mut r = rng::stream(35, i);
        let c = random_point(&mut r, &H2Point::ORIGIN, 3.0);
        let [p, q, s] = [0; 3].map(|_| random_point(&mut r, &c, 2.5));
        let h = holonomy_check(&p, &q, &s, 10_000).unwrap();
        worst = worst.max(h.residual);
    }
    assert!(worst <= 1e-6, "worst residual {worst}");
}

#[test]
fn area_is_bounded_by_g_of_each_side() {
    for i in 0..10_000 {
        let mut r = rng::stream(37, i);
        let [p, q, s] = [0; 3].map(|_| random_point(&mut r, &H2Point::ORIGIN, 5.0));
        let area = triangle_area(&p, &q, &s);
        let bound = [distance(&p, &q), distance(&q, &s), distance(&p, &s)]
            .into_iter()
            .map(|side| max_area_g(side).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(area <= bound + 1e-12, "area {area} > g {bound}");
        assert!(area <= PI);
    }
}
