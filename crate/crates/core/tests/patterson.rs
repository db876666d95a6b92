use std::sync::OnceLock;

use orbitlab::boundary::Arc;
use orbitlab::experiments::ProductOrbit;
use orbitlab::lattice::{enumerate, LatticeKind, LatticeSpec, OrbitSet};
use orbitlab::patterson::*;

fn psl_14() -> &'static OrbitSet {
    static O: OnceLock<OrbitSet> = OnceLock::new();
    O.get_or_init(|| enumerate(&LatticeSpec::psl2z(), 14.0).unwrap())
}

#[test]
fn partial_sum_matches_direct_summation() {
    let o = psl_14();
    let e = poincare_partial(o, 2.0, 10.0).unwrap();
    let mut direct = 0.0;
    for p in o.iter() {
        if p.dist < 10.0 {
            direct += (-2.0 * p.dist).exp();
        }
    }
    assert!((e.partial_sum - direct).abs() < 1e-12 * direct);
    let sharded = poincare_sharded(o, 2.0, 10.0, 7).unwrap();
    assert!((sharded - e.partial_sum).abs() < 1e-12 * direct);
}

#[test]
fn large_s_leaves_the_stabilizer() {
    let e = poincare_partial(psl_14(), 200.0, 14.0).unwrap();
    assert!((e.partial_sum - 2.0).abs() < 1e-12);
}

#[test]
fn tail_is_small_at_one_point_two() {
    let e = poincare_partial(psl_14(), 1.2, 14.0).unwrap();
    assert!(e.tail_bound / e.partial_sum < 0.10, "{}", e.tail_bound / e.partial_sum);
}

#[test]
fn partial_sums_decrease_in_s() {
    let v: Vec<f64> = [1.1, 1.2, 1.5, 2.0, 3.0].iter().map(|&s| poincare_partial(psl_14(), s, 12.0).unwrap().partial_sum).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn critical_exponents_of_lattices() {
    let e = critical_exponent(&psl_14().restrict(12.0).unwrap()).unwrap();
    assert!((e - 1.0).abs() < 0.1, "{e}");
    let g = enumerate(&LatticeSpec::standard(LatticeKind::Gamma0(2)).unwrap(), 12.0).unwrap();
    let e = critical_exponent(&g).unwrap();
    assert!((e - 1.0).abs() < 0.1, "{e}");
    assert!(critical_exponent(&enumerate(&LatticeSpec::psl2z(), 8.0).unwrap()).is_err());
}

#[test]
fn pole_series_is_stable() {
    let pts = pole_order_check(psl_14(), &[1.5, 1.35, 1.25, 1.2], 14.0).unwrap();
    assert!(pts.iter().all(|p| p.usable));
    assert!(pole_spread(&pts) < 0.15, "{}", pole_spread(&pts));
    let near = pole_order_check(psl_14(), &[1.02], 14.0).unwrap();
    assert!(!near[0].usable);
}

#[test]
fn ps_measure_normalization_and_interior_mass() {
    let arcs = Arc::partition(8, 0.0);
    let m = ps_measure(psl_14(), 1.2, &arcs, 14.0, INTERIOR_CUTOFF).unwrap();
    assert!((m.measure.total - 1.0).abs() < 1e-12);
    let b: f64 = m.boundary_weights().iter().sum();
    assert!((b - 1.0).abs() < 1e-12);
    assert!((m.interior_mass + m.measure.weights[..8].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let m15 = ps_measure(psl_14(), 1.5, &arcs, 14.0, INTERIOR_CUTOFF).unwrap();
    assert!(m.interior_mass < m15.interior_mass);
}

#[test]
fn unusable_tail_reports_minimal_s() {
    let err = ps_measure(psl_14(), 1.05, &Arc::partition(8, 0.0), 14.0, INTERIOR_CUTOFF).unwrap_err();
    assert!(err.to_string().contains("minimal usable s"), "{err}");
}

#[test]
fn rotation_changes_weights_by_slivers_only() {
    let o = psl_14();
    let phi = 0.05;
    let base = ps_measure(o, 1.3, &Arc::partition(8, 0.0), 14.0, INTERIOR_CUTOFF).unwrap();
    let rot = ps_measure(o, 1.3, &Arc::partition(8, phi), 14.0, INTERIOR_CUTOFF).unwrap();
    let fine = ps_measure(o, 1.3, &slivers(phi), 14.0, INTERIOR_CUTOFF).unwrap();
    // `slivers` alternates [k pi/4, k pi/4 + phi) and the rest of the octant.
    for k in 0..8 {
        let here = fine.measure.weights[2 * k];
        let next = fine.measure.weights[(2 * k + 2) % 16];
        assert!((rot.measure.weights[k] - base.measure.weights[k]).abs() <= here + next + 1e-15);
    }
}

fn slivers(phi: f64) -> Vec<Arc> {
    let q = std::f64::consts::FRAC_PI_4;
    (0..8).flat_map(|k| {
        let s = k as f64 * q;
        [Arc::new(s, s + phi).unwrap(), Arc::new(s + phi, s + q).unwrap()]
    }).collect()
}

#[test]
fn arc_measure_approaches_round_as_s_decreases() {
    let arcs = Arc::partition(8, 0.2);
    let devs: Vec<f64> = [2.0, 1.6, 1.4, 1.3, 1.2].iter().map(|&s| ps_measure(psl_14(), s, &arcs, 14.0, INTERIOR_CUTOFF).unwrap().max_deviation()).collect();
    let wins = devs.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(wins >= 3, "{devs:?}");
}

#[test]
fn product_mass_concentrates_on_barycenter_direction() {
    let po = ProductOrbit::enumerate(&LatticeSpec::product(), 8.0).unwrap();
    let far = direction_histogram(&po, 2.5, 8.0, 18).unwrap();
    let near = direction_histogram(&po, 1.5, 8.0, 18).unwrap();
    assert!((near.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(near.mass_near_barycenter(0.3) > far.mass_near_barycenter(0.3));
}
