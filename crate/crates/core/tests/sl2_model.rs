use bicomb::checks::{check_bicombing_axioms, check_consistent, check_equivariant, CheckParams};
use bicomb::h2::{distance, geodesic_drift, parallel_transport_drift, H2Path, H2Point};
use bicomb::rng;
use bicomb::sl2::*;
use bicomb::BicombingSpace;

fn sp(x: f64, y: f64, f: f64) -> SLPoint {
    SLPoint::new(H2Point::new(x, y).unwrap(), f).unwrap()
}

/// Best `sqrt(L² + (h + drift_c - drift_geo)²)` over Euclidean circle arcs
/// through both base points, each measured by sampling.
fn circle_arc_oracle(a: &SLPoint, b: &SLPoint) -> f64 {
    let (p, q) = (a.base, b.base);
    let (_, h) = strip_coordinates(a, b);
    let drift_geo = geodesic_drift(&p, &q);
    let (mx, my) = (0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let norm = dx.hypot(dy);
    let (nx, ny) = (-dy / norm, dx / norm);
    let mut best = distance(&p, &q).hypot(h);
    for k in 0..3000 {
        let mag = 1e-3 * (1.0045f64).powi(k);
        for s in [mag, -mag] {
            let (cx, cy) = (mx + s * nx, my + s * ny);
            let r = (p.x - cx).hypot(p.y - cy);
            let a0 = (p.y - cy).atan2(p.x - cx);
            let a1 = (q.y - cy).atan2(q.x - cx);
            let mut sweep = a1 - a0;
            while sweep <= 0.0 {
                sweep += 2.0 * std::f64::consts::PI;
            }
            for span in [sweep, sweep - 2.0 * std::f64::consts::PI] {
                let n = 1500;
                let pts: Vec<(f64, H2Point)> = (0..=n)
                    .map(|i| {
                        let ang = a0 + span * i as f64 / n as f64;
                        (i as f64, H2Point { x: cx + r * ang.cos(), y: cy + r * ang.sin() })
                    })
                    .collect();
                if pts.iter().any(|(_, z)| z.y <= 1e-3) {
                    continue;
                }
                let len: f64 = pts.windows(2).map(|w| distance(&w[0].1, &w[1].1)).sum();
                let drift = parallel_transport_drift(&H2Path::new(pts).unwrap());
                best = best.min(len.hypot(h + drift - drift_geo));
            }
        }
    }
    best
}

#[test]
fn arc_family_matches_circle_arc_oracle() {
    let cases = [
        (sp(0.0, 1.0, 0.0), sp(0.8, 1.3, 2.0)),
        (sp(-0.3, 0.7, 0.5), sp(0.4, 1.9, -3.0)),
        (sp(0.0, 1.0, 0.0), sp(1.5, 1.0, 0.6)),
        (sp(0.2, 1.2, 1.0), sp(0.25, 1.1, 4.5)),
    ];
    for (a, b) in cases {
        let upper = upper_estimate(&a, &b, 256);
        let oracle = circle_arc_oracle(&a, &b);
        assert!((upper - oracle).abs() < 2e-4, "upper {upper} oracle {oracle} for {a:?} {b:?}");
    }
}

#[test]
fn strip_round_trip() {
    for i in 0..200 {
        let mut r = rng::stream(17, i);
        let space = SL2Space::default();
        let a = space.sample(&mut r, 3.0);
        let b = space.sample(&mut r, 3.0);
        let (d, h) = strip_coordinates(&a, &b);
        let back = StripCoords::new(a.base, b.base, a.fiber, d, h).unwrap().to_point();
        assert!((back.base.x - b.base.x).abs() < 1e-8 && (back.base.y - b.base.y).abs() < 1e-8);
        assert!((back.fiber - b.fiber).abs() < 1e-8);
        let t = rng::unit(&mut r);
        let m = sl2_bicombe(&a, &b, t);
        let (dm, hm) = strip_coordinates(&a, &m);
        assert!((dm - t * d).abs() < 1e-9 && (hm - t * h).abs() < 1e-9);
    }
}

#[test]
fn path_length_matches_metric_integration() {
    for i in 0..50 {
        let mut r = rng::stream(23, i);
        let space = SL2Space::default();
        let a = space.sample(&mut r, 3.0);
        let b = space.sample(&mut r, 3.0);
        let pts: Vec<SLPoint> = (0..=2000).map(|k| sl2_bicombe(&a, &b, k as f64 / 2000.0)).collect();
        let poly = polyline_length(&pts);
        let l = sl2_path_length(&a, &b);
        assert!((poly - l).abs() < 1e-5, "{poly} vs {l}");
        assert!((l - sl2_path_length(&b, &a)).abs() < 1e-9);
    }
}

#[test]
fn model_passes_axioms_consistency_and_equivariance() {
    let space = SL2Space::default();
    let p = CheckParams::new(2000, 1e-6, 31);
    let r = check_bicombing_axioms(&space, &p).unwrap();
    assert!(r.passed, "{}", r.to_json());
    let r = check_consistent(&space, &p).unwrap();
    assert!(r.passed, "{}", r.to_json());
    let r = check_equivariant(&space, &p).unwrap();
    assert!(r.passed, "{}", r.to_json());
    assert_eq!(r.mode, "one-sided");
}

#[test]
fn chain_and_length_difference_sweeps_pass() {
    let space = SL2Space::default();
    let r = chain_check_sweep(&space, 500, 1e-6, 41, 3.0);
    assert!(r.passed, "{}", r.to_json());
    let r = length_difference_sweep(&space, 500, 1e-6, 43, 3.0);
    assert!(r.passed, "{}", r.to_json());
    let r = strip_bounds_sweep(&space, 500, 1e-9, 47, 3.0);
    assert!(r.passed, "{}", r.to_json());
}
