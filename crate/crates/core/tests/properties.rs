use std::f64::consts::TAU;

use num_complex::Complex64;
use orbitlab::boundary::{boundary_action, invariant_measure, Arc, BoundaryPoint, I};
use orbitlab::homspace::{in_domain, reduce_point};
use orbitlab::lattice::{is_psl_canonical, psl_canonical};
use orbitlab::lie::compact::{haar_k, random_group_element};
use orbitlab::lie::sl2::{self, Mat2};
use orbitlab::lie::{canonical_m_reduce, cartan_decompose, distance_to_origin, GroupElement, GroupSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sl2_from(t1: f64, t: f64, t2: f64) -> Mat2 {
    sl2::mul(&sl2::mul(&sl2::rotation(t1), &sl2::diag(t)), &sl2::rotation(t2))
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn psl_canonical_is_idempotent_and_sign_blind(m in prop::array::uniform4(-1000i64..1000)) {
        let c = psl_canonical(m);
        prop_assert_eq!(psl_canonical(c), c);
        prop_assert_eq!(psl_canonical(m.map(|x| -x)), c);
        prop_assert!(m == [0; 4] || is_psl_canonical(&c));
    }

    #[test]
    fn sl2_distance_is_twice_the_cartan_parameter(t1 in 0.0..TAU, t in 0.0..8.0f64, t2 in 0.0..TAU) {
        let m = sl2_from(t1, t, t2);
        let g = GroupElement::sl2(m[0], m[1], m[2], m[3]).unwrap();
        let d = distance_to_origin(&g).unwrap();
        prop_assert!((d - 2.0 * t).abs() < 1e-9 * (1.0 + t), "{} vs {}", d, 2.0 * t);
        let c = cartan_decompose(&g).unwrap();
        // Rounding leaves det(g) off by about eps |g|^2; the unimodular Cartan
        // factors cannot carry that, so entries can move by about eps |g|^3.
        let scale = g.max_abs_entry().max(1.0);
        let diff = c.reconstruct().max_entry_diff(&g);
        prop_assert!(diff < 1e-14 * scale * scale * scale, "diff {} at scale {}", diff, scale);
    }

    #[test]
    fn distance_is_left_k_invariant_and_inverse_symmetric(seed in any::<u64>(), n in 2usize..5) {
        let spec = GroupSpec::sl(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_group_element(&spec, &mut rng);
        let k = haar_k(&spec, &mut rng);
        let d = distance_to_origin(&g).unwrap();
        prop_assert!((distance_to_origin(&k.mul(&g)).unwrap() - d).abs() < 1e-9 * (1.0 + d));
        prop_assert!((distance_to_origin(&g.inverse()).unwrap() - d).abs() < 1e-9 * (1.0 + d));
    }

    #[test]
    fn m_orbit_collapses_to_one_representative(seed in any::<u64>(), flips in prop::array::uniform2(any::<bool>())) {
        let spec = GroupSpec::sl(3);
        let g = random_group_element(&spec, &mut ChaCha8Rng::seed_from_u64(seed));
        let c = cartan_decompose(&g).unwrap();
        prop_assume!(c.regular);
        let s = [if flips[0] { -1.0 } else { 1.0 }, if flips[1] { -1.0 } else { 1.0 }];
        let d = [s[0], s[1], s[0] * s[1]];
        let m = GroupElement::from_row_major(&spec, &[d[0], 0.0, 0.0, 0.0, d[1], 0.0, 0.0, 0.0, d[2]]).unwrap();
        let moved = canonical_m_reduce(c.k1.mul(&m), c.a_log.clone(), m.inverse().mul(&c.k2));
        prop_assert!(moved.k1.max_entry_diff(&c.k1) < 1e-12);
        prop_assert!(moved.k2.max_entry_diff(&c.k2) < 1e-12);
    }

    #[test]
    fn reduction_lands_in_the_domain_and_is_idempotent(x in -100.0..100.0f64, y in 1e-3..50.0f64) {
        let (z, _) = reduce_point(Complex64::new(x, y)).unwrap();
        prop_assert!(in_domain(z));
        let (z2, steps) = reduce_point(z).unwrap();
        prop_assert_eq!(steps, 0);
        prop_assert!((z2 - z).norm() < 1e-12);
    }

    #[test]
    fn boundary_action_composes(b in 0.0..TAU, g in prop::array::uniform3(0.0..3.0f64), h in prop::array::uniform3(0.0..3.0f64)) {
        let (g, h) = (sl2_from(g[0], g[1], g[2]), sl2_from(h[0], h[1], h[2]));
        let p = BoundaryPoint::new(b);
        let step = boundary_action(boundary_action(p, &g, I), &h, I);
        let once = boundary_action(p, &sl2::mul(&h, &g), I);
        prop_assert!(circle_gap(step.angle, once.angle) < 1e-9);
    }

    #[test]
    fn partitions_cover_each_angle_once(n in 1usize..24, offset in -10.0..10.0f64, angle in -20.0..20.0f64) {
        let arcs = Arc::partition(n, offset);
        prop_assert_eq!(arcs.iter().filter(|a| a.contains(angle)).count(), 1);
    }

    #[test]
    fn harmonic_measure_is_a_probability(n in 1usize..16, offset in 0.0..TAU, x in -5.0..5.0f64, y in 0.05..20.0f64) {
        let total: f64 = Arc::partition(n, offset).iter().map(|a| invariant_measure(I, Complex64::new(x, y), a)).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}
