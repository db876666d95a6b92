use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use orbitlab::boundary::{self, Arc, BoundaryPoint, I};
use orbitlab::experiments::*;
use orbitlab::lattice::{enumerate, LatticeKind, LatticeSpec, OrbitSet};
use orbitlab::lie::{GroupElement, GroupSpec};

fn psl_12() -> &'static OrbitSet {
    static O: OnceLock<OrbitSet> = OnceLock::new();
    O.get_or_init(|| enumerate(&LatticeSpec::psl2z(), 12.0).unwrap())
}

fn assert_ratios(r: &CountReport, lo: f64, hi: f64) {
    for row in &r.rows {
        assert!(row.ratio >= lo && row.ratio <= hi, "{} ratio {} outside [{lo}, {hi}]", row.bin.id, row.ratio);
    }
}

#[test]
fn ball_ratio_at_twelve() {
    let r = count_ball(psl_12(), 12.0).unwrap();
    assert!((r.rows[0].predicted - 6.0 * (12f64.cosh() - 1.0)).abs() < 1e-6 * r.rows[0].predicted);
    assert!((r.rows[0].ratio - 1.0).abs() < 0.05);
}

#[test]
fn radius_above_enumeration_is_an_error() {
    assert!(count_ball(psl_12(), 12.5).is_err());
}

#[test]
fn sector_eight_arcs_and_stabilizer_factor() {
    let arcs = Arc::partition(8, 0.0);
    let g = count_sector(psl_12(), &arcs, 12.0, CountMode::Gamma).unwrap();
    let p = count_sector(psl_12(), &arcs, 12.0, CountMode::Point).unwrap();
    assert_ratios(&g, 0.9, 1.1);
    assert_eq!(p.stabilizer_order, 2);
    for (a, b) in g.rows.iter().zip(&p.rows) {
        assert_eq!(a.observed, 2 * b.observed);
        assert!((a.predicted - 2.0 * b.predicted).abs() < 1e-9 * a.predicted);
    }
}

#[test]
fn boundary_at_cusp() {
    let deco = decorate_boundary(psl_12(), BoundaryPoint::infinity()).unwrap();
    let r = count_boundary(psl_12(), &deco, &Arc::partition(8, 0.0), 12.0).unwrap();
    assert_ratios(&r, 0.85, 1.15);
    let full = count_boundary(psl_12(), &deco, &[Arc::full()], 12.0).unwrap();
    assert_eq!(full.rows[0].observed, psl_12().count_below(12.0) as u64);
}

#[test]
fn boundary_with_offset_observer_uses_harmonic_measure() {
    let g = GroupElement::sl2(2.0, 0.0, 0.0, 0.5).unwrap();
    let lat = LatticeSpec::new(LatticeKind::Psl2z, g).unwrap();
    let orbit = enumerate(&lat, 12.0).unwrap();
    let deco = decorate_boundary(&orbit, BoundaryPoint::infinity()).unwrap();
    let arcs = Arc::partition(8, 0.0);
    let r = count_boundary(&orbit, &deco, &arcs, 12.0).unwrap();
    assert_ratios(&r, 0.85, 1.15);
    // Predictions are far from uniform for y = i/4.
    let p: Vec<f64> = r.rows.iter().map(|row| row.predicted).collect();
    let spread = p.iter().cloned().fold(0.0, f64::max) / p.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > 3.0);
    let y = boundary::point_of(&lat.conjugator_block(0));
    let total: f64 = arcs.iter().map(|a| boundary::invariant_measure(I, y, a)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn joint_grid_and_exact_marginals() {
    let o = psl_12();
    let deco = decorate_boundary(o, BoundaryPoint::infinity()).unwrap();
    let s4 = Arc::partition(4, 0.0);
    let j = count_joint(o, &deco, &s4, &s4, 12.0).unwrap();
    assert_eq!(j.report.rows.len(), 16);
    assert_ratios(&j.report, 0.8, 1.2);
    let sector = count_sector(o, &s4, 12.0, CountMode::Gamma).unwrap();
    let bnd = count_boundary(o, &deco, &s4, 12.0).unwrap();
    assert_eq!(j.sector_marginal(), sector.observed());
    assert_eq!(j.boundary_marginal(), bnd.observed());
}

#[test]
fn bisector_quarter_by_quarter() {
    let q = Arc::new(0.0, FRAC_PI_2 * 2.0).unwrap();
    let r = count_bisector(psl_12(), &[q], &[q], 12.0).unwrap();
    assert!((r.rows[0].ratio - 1.0).abs() < 0.15, "{}", r.rows[0].ratio);
}

#[test]
fn shards_merge_to_serial() {
    let o = enumerate(&LatticeSpec::psl2z(), 8.0).unwrap();
    let arcs = Arc::partition(8, 0.3);
    let n = o.count_below(8.0);
    let serial = sector_shard(&o, &arcs, 8.0, 0..n).unwrap();
    let cuts = [0, n / 3, n / 2, n];
    let mut merged = sector_shard(&o, &arcs, 8.0, 0..0).unwrap();
    for w in cuts.windows(2).rev() {
        merged = merged.merge(&sector_shard(&o, &arcs, 8.0, w[0]..w[1]).unwrap()).unwrap();
    }
    assert_eq!(merged, serial);
    let report = count_sector(&o, &arcs, 8.0, CountMode::Gamma).unwrap();
    assert_eq!(serial.weights, report.observed().iter().map(|&c| c as f64).collect::<Vec<_>>());
}

#[test]
fn counts_monotone_in_radius() {
    let o = enumerate(&LatticeSpec::psl2z(), 9.0).unwrap();
    let deco = decorate_boundary(&o, BoundaryPoint::infinity()).unwrap();
    let arcs = Arc::partition(6, 0.1);
    let mut prev = vec![0u64; 6];
    for t in [3.0, 5.0, 7.0, 9.0] {
        let cur = count_boundary(&o, &deco, &arcs, t).unwrap().observed();
        assert!(cur.iter().zip(&prev).all(|(c, p)| c >= p));
        prev = cur;
    }
}

#[test]
fn equidistribution_trend_over_seeded_layouts() {
    let o = psl_12();
    let deco = decorate_boundary(o, BoundaryPoint::infinity()).unwrap();
    let offsets = [0.0, 0.37, 1.1, 2.9];
    let mut wins = [0usize; 3];
    for &off in &offsets {
        let arcs = Arc::partition(8, off);
        let s4 = Arc::partition(4, off);
        let dev = |t: f64| {
            [
                count_sector(o, &arcs, t, CountMode::Gamma).unwrap().max_deviation(),
                count_boundary(o, &deco, &arcs, t).unwrap().max_deviation(),
                count_joint(o, &deco, &s4, &s4, t).unwrap().report.max_deviation(),
            ]
        };
        let (d8, d12) = (dev(8.0), dev(12.0));
        for k in 0..3 {
            if d12[k] < d8[k] {
                wins[k] += 1;
            }
        }
    }
    assert!(wins.iter().all(|&w| w >= 3), "{wins:?}");
}

#[test]
fn product_ball_and_bisector() {
    let po = ProductOrbit::enumerate(&LatticeSpec::product(), 8.0).unwrap();
    let ball = count_ball_product(&po, 8.0).unwrap();
    assert!((ball.rows[0].ratio - 1.0).abs() < 0.2);
    let h = Arc::new(0.0, PI).unwrap();
    let r = count_bisector_product(&po, [h, h], [h, h], 8.0).unwrap();
    assert!((r.rows[0].ratio - 1.0).abs() < 0.25, "{}", r.rows[0].ratio);
    let full = count_bisector_product(&po, [Arc::full(); 2], [Arc::full(); 2], 8.0).unwrap();
    assert_eq!(full.rows[0].observed, ball.rows[0].observed);
}

#[test]
fn asymmetry_full_boxes_are_exact() {
    let po = ProductOrbit::enumerate(&LatticeSpec::product(), 5.0).unwrap();
    let f = [Arc::full(); 2];
    let s = asymmetry_probe(&po, f, f, &[3.0, 5.0]).unwrap();
    assert!(s.ordered_ratios.iter().chain(&s.swapped_ratios).all(|&r| r == 1.0));
    let q = [Arc::new(0.0, TAU / 3.0).unwrap(), Arc::new(1.0, 3.0).unwrap()];
    let s = asymmetry_probe(&po, q, q, &[5.0]).unwrap();
    assert!(s.ordered_ratios[0].is_finite() && s.swapped_ratios[0].is_finite());
}

#[test]
fn asymmetry_rejects_conjugated_product() {
    let spec = GroupSpec::product(&[2, 2]);
    let g = GroupElement::exp_diag(&spec, &[0.3, -0.3, 0.2, -0.2]).unwrap();
    let lat = LatticeSpec::new(LatticeKind::ProductPsl2z, g).unwrap();
    let po = ProductOrbit::enumerate(&lat, 3.0).unwrap();
    assert!(asymmetry_probe(&po, [Arc::full(); 2], [Arc::full(); 2], &[2.0]).is_err());
}
