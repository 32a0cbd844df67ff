use std::time::Instant;

use bicomb::contraction::*;
use bicomb::flow::*;
use bicomb::h2::H2Space;
use bicomb::rng;
use bicomb::sl2::{sl2_convexity_modulus, sl2_length_modulus};
use bicomb::{linear_modulus, BicombingSpace, Euclidean, LengthModulus, SL2Space};

#[test]
fn constant_trails_embed_isometrically() {
    let h = H2Space;
    for i in 0..100 {
        let mut r = rng::stream(3, i);
        let (p, q) = (h.sample(&mut r, 3.0), h.sample(&mut r, 3.0));
        let fs = fs_distance(&h, &Trail::constant(&h, p), &Trail::constant(&h, q), 1e-10).unwrap();
        assert!((fs.value - h.dist(&p, &q)).abs() <= 1e-8);
    }
}

#[test]
fn trails_are_one_lipschitz() {
    let h = H2Space;
    for i in 0..10_000 {
        let mut r = rng::stream(5, i);
        let c = random_trail(&h, &mut r, 3.0, 3.0);
        let (t, s) = (rng::uniform(&mut r, -6.0, 6.0), rng::uniform(&mut r, -6.0, 6.0));
        assert!(h.dist(&c.eval(&h, t), &c.eval(&h, s)) <= (t - s).abs() + 1e-9);
    }
}

#[test]
fn flow_is_additive_and_one_lipschitz() {
    let e = Euclidean::plane();
    for i in 0..1000 {
        let mut r = rng::stream(7, i);
        let c = random_trail(&e, &mut r, 3.0, 3.0);
        let tau = rng::uniform(&mut r, -3.0, 3.0);
        let back = c.flow(tau).flow(-tau);
        for k in 0..10 {
            let t = -5.0 + k as f64;
            assert!(e.dist(&back.eval(&e, t), &c.eval(&e, t)) < 1e-12);
        }
        let fs = fs_distance(&e, &c.flow(tau), &c, 1e-9).unwrap();
        assert!(fs.value <= tau.abs() + fs.error_bound);
    }
}

#[test]
fn fs_distance_is_a_metric_on_samples() {
    let h = H2Space;
    for i in 0..300 {
        let mut r = rng::stream(9, i);
        let t: Vec<_> = (0..3).map(|_| random_trail(&h, &mut r, 2.0, 2.0)).collect();
        let d = |a: usize, b: usize| fs_distance(&h, &t[a], &t[b], 1e-9).unwrap();
        let (ab, ba, bc, ac) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        assert!((ab.value - ba.value).abs() <= ab.error_bound + ba.error_bound + 1e-12);
        assert!(ac.value <= ab.value + bc.value + ab.error_bound + bc.error_bound + ac.error_bound + 1e-12);
    }
}

#[test]
fn restriction_matches_clamped_trail() {
    let r = restriction_sweep(&H2Space, 300, 1e-9, 11, 3.0);
    assert!(r.passed, "{}", r.to_json());
    let r = restriction_sweep(&SL2Space::default(), 100, 1e-6, 11, 3.0);
    assert!(r.passed, "{}", r.to_json());
}

#[test]
fn flow_bounds_hold_on_three_spaces() {
    let start = Instant::now();
    let r = flow_bounds_sweep(&Euclidean::plane(), 300, 1e-7, 1e-8, 13, 3.0);
    assert!(r.passed, "{}", r.to_json());
    let r = flow_bounds_sweep(&H2Space, 300, 1e-7, 1e-8, 13, 3.0);
    assert!(r.passed, "{}", r.to_json());
    let r = flow_bounds_sweep(&SL2Space { mesh: 16 }, 100, 1e-7, 1e-8, 13, 3.0);
    assert!(r.passed, "{}", r.to_json());
    eprintln!("flow bounds: {:?}", start.elapsed());
}

#[test]
fn contraction_recipe_on_h2_and_plane() {
    let (a, f) = (linear_modulus(), LengthModulus::identity());
    let start = Instant::now();
    for (beta, l, delta) in [(1.0, 1.0, 0.1), (1.0, 1.0, 0.01), (2.0, 1.0, 0.1)] {
        let c = contraction_constants(beta, l, delta, &a, &f).unwrap();
        assert!(c.all_hold(&a, &f));
        let r = check_contraction(&H2Space, &a, &f, beta, l, delta, 100, 17).unwrap();
        assert!(r.passed, "{}", r.to_json());
    }
    let r = check_contraction(&Euclidean::plane(), &a, &f, 1.0, 1.0, 0.1, 100, 17).unwrap();
    assert!(r.passed, "{}", r.to_json());
    eprintln!("contraction: {:?}", start.elapsed());
}

#[test]
fn shadowing_on_h2_and_model() {
    let start = Instant::now();
    let (a, f) = (linear_modulus(), LengthModulus::identity());
    let c = contraction_constants(1.0, 1.0, 10.0, &a, &f).unwrap();
    let r = shadow_lemma_sweep(&H2Space, &a, &c, 200, 100, 1e-9, 19);
    assert!(r.passed, "{}", r.to_json());
    let (a, f) = (sl2_convexity_modulus(), sl2_length_modulus());
    let c = contraction_constants(0.25, 1.0, 10.0, &a, &f).unwrap();
    eprintln!("model constants {c:?}");
    let r = shadow_lemma_sweep(&SL2Space::default(), &a, &c, 200, 100, 1e-6, 19);
    assert!(r.passed, "{}", r.to_json());
    assert_eq!(r.series.len(), 5);
    eprintln!("shadowing: {:?}", start.elapsed());
}
