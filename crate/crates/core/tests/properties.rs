use bicomb::h2::{distance, h2_geodesic, triangle_area};
use bicomb::rng;
use bicomb::sl2::{sl2_convexity_modulus, sl2_modulus_f};
use bicomb::{fs_distance, BicombingSpace, H2Point, H2Space, Mobius, SL2Space, Trail};
use proptest::prelude::*;

fn h2_point() -> impl Strategy<Value = H2Point> {
    (-5.0f64..5.0, -3.0f64..3.0).prop_map(|(x, ly)| H2Point { x, y: ly.exp() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mobius_maps_preserve_distance_and_geodesics(
        p in h2_point(), q in h2_point(), angle in -3.0f64..3.0, len in 0.0f64..4.0, t in 0.0f64..1.0,
    ) {
        let m = Mobius::translation(angle, len);
        let (mp, mq) = (m.apply(&p), m.apply(&q));
        let d = distance(&p, &q);
        prop_assert!((distance(&mp, &mq) - d).abs() <= 1e-9 * (1.0 + d));
        let moved = m.apply(&h2_geodesic(&p, &q, t));
        prop_assert!(distance(&moved, &h2_geodesic(&mp, &mq, t)) <= 1e-8 * (1.0 + d));
    }

    #[test]
    fn triangle_area_is_symmetric_and_below_pi(p in h2_point(), q in h2_point(), r in h2_point()) {
        let a = triangle_area(&p, &q, &r);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&a));
        prop_assert!((a - triangle_area(&q, &r, &p)).abs() <= 1e-9);
        prop_assert!((a - triangle_area(&r, &q, &p)).abs() <= 1e-9);
    }

    #[test]
    fn model_bicombing_hits_endpoints(seed in 0u64..100_000) {
        let s = SL2Space { mesh: 16 };
        let mut r = rng::stream(seed, 0);
        let (a, b) = (s.sample(&mut r, 2.0), s.sample(&mut r, 2.0));
        prop_assert!(s.dist(&s.bicombe(&a, &b, 0.0), &a) <= 1e-12);
        prop_assert!(s.dist(&s.bicombe(&a, &b, 1.0), &b) <= 1e-12);
        prop_assert!(s.dist_lower(&a, &b) <= s.dist(&a, &b) + 1e-12);
    }

    #[test]
    fn model_moduli_are_nonnegative(t in 0.0f64..1.0, x in 0.0f64..5.0, x2 in 0.0f64..5.0) {
        let a = sl2_convexity_modulus();
        prop_assert!(a.eval(t, x, x2) >= 0.0);
        prop_assert!(sl2_modulus_f(x).unwrap() >= 0.0);
    }

    #[test]
    fn flow_distance_is_shift_invariant(seed in 0u64..100_000, tau in -2.0f64..2.0) {
        let h = H2Space;
        let mut r = rng::stream(seed, 1);
        let (p, q, x) = (h.sample(&mut r, 2.0), h.sample(&mut r, 2.0), h.sample(&mut r, 2.0));
        let c = Trail::new(&h, p, q, 0.0);
        let d = Trail::new(&h, x, p, 1.0);
        let base = fs_distance(&h, &c, &d, 1e-10).unwrap();
        let moved = fs_distance(&h, &c.flow(tau), &d.flow(tau), 1e-10).unwrap();
        // Flowing both trails by tau rescales the weight by at most e^|tau|.
        prop_assert!(moved.lower() <= tau.abs().exp() * base.upper() + 1e-9);
        prop_assert!(base.lower() <= tau.abs().exp() * moved.upper() + 1e-9);
    }
}
