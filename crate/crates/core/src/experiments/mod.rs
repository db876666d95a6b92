//! Orbit counts per bin against the volume predictions of the counting theorems.
//!
//! All rank-one experiments use the basepoint `x = i` (the coset `K`) and the
//! observer `y = K g`, where `g` is the conjugator of the orbit. The point
//! `y gamma` has visual angle `pi + k2(g gamma)` from `x`, and the boundary
//! image of `b` is `b gamma^-1 = gamma * b`.

pub mod report;

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::boundary::{self, check_partition, invariant_measure, locate, Arc, BoundaryPoint, I};
use crate::error::{Error, Result};
use crate::lattice::{enumerate, psl_canonical, stabilizer, stream_count_product, LatticeKind, LatticeSpec, OrbitSet};
use crate::lie::sl2::{self, wrap_angle};
use crate::lie::GroupSpec;
use crate::volume::{ball_volume, root_system};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub id: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bin {
    fn arc(id: String, a: &Arc) -> Self {
        Bin { id, lo: vec![a.start], hi: vec![a.end()] }
    }

    fn grid(id: String, a: &Arc, b: &Arc) -> Self {
        Bin { id, lo: vec![a.start, b.start], hi: vec![a.end(), b.end()] }
    }
}

/// Nonnegative weights over a fixed list of bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub bins: Vec<Bin>,
    pub weights: Vec<f64>,
    pub total: f64,
}

impl EmpiricalMeasure {
    pub fn new(bins: Vec<Bin>) -> Self {
        let n = bins.len();
        EmpiricalMeasure { bins, weights: vec![0.0; n], total: 0.0 }
    }

    pub fn add(&mut self, bin: usize, w: f64) {
        self.weights[bin] += w;
        self.total += w;
    }

    /// Weight-wise sum of two measures over the same bins.
    pub fn merge(&self, other: &EmpiricalMeasure) -> Result<EmpiricalMeasure> {
        if self.bins != other.bins {
            return Err(Error::invalid("cannot merge measures over different bins"));
        }
        Ok(EmpiricalMeasure {
            bins: self.bins.clone(),
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
            total: self.total + other.total,
        })
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CountMode {
    /// Count lattice elements `gamma`.
    Gamma,
    /// Count distinct orbit points `y gamma`.
    Point,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    pub bin: Bin,
    pub observed: u64,
    pub predicted: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub experiment: String,
    pub t: f64,
    pub mode: CountMode,
    pub stabilizer_order: usize,
    pub rows: Vec<CountRow>,
    /// `|sum observed - sum predicted| / sum predicted`.
    pub global_rel_error: f64,
    /// No counted point lies at positive distance; ratios carry no information.
    pub degenerate: bool,
}

impl CountReport {
    fn build(experiment: &str, t: f64, mode: CountMode, stabilizer_order: usize, cells: Vec<(Bin, u64, f64)>, degenerate: bool) -> Self {
        let obs: f64 = cells.iter().map(|c| c.1 as f64).sum();
        let pred: f64 = cells.iter().map(|c| c.2).sum();
        let rows = cells
            .into_iter()
            .map(|(bin, observed, predicted)| CountRow { bin, observed, predicted, ratio: observed as f64 / predicted })
            .collect();
        CountReport {
            experiment: experiment.into(),
            t,
            mode,
            stabilizer_order,
            rows,
            global_rel_error: (obs - pred).abs() / pred,
            degenerate,
        }
    }

    /// `max |ratio - 1|` over bins with a positive prediction.
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().filter(|r| r.predicted > 0.0).map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn observed(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.observed).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }
}

fn group_spec(kind: LatticeKind) -> GroupSpec {
    if kind.is_product() {
        GroupSpec::product(&[2, 2])
    } else {
        GroupSpec::sl(2)
    }
}

/// `Vol(G_T) / Vol(G / Gamma)`.
pub fn predicted_count(lattice: &LatticeSpec, t: f64) -> Result<f64> {
    let rs = root_system(&group_spec(lattice.kind));
    Ok(ball_volume(&rs, t)? / crate::lattice::covolume(lattice.kind)?)
}

fn check_radius(orbit: &OrbitSet, t: f64) -> Result<usize> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("radius must be non-negative, got {t}")));
    }
    if t > orbit.t {
        return Err(Error::MissingCache(format!("orbit enumerated to T = {} but T = {t} requested", orbit.t)));
    }
    Ok(orbit.count_below(t))
}

fn require_rank_one(orbit: &OrbitSet) -> Result<()> {
    if orbit.lattice.kind.is_product() {
        return Err(Error::domain("this experiment needs a rank-one orbit"));
    }
    Ok(())
}

fn degenerate(orbit: &OrbitSet, n: usize) -> bool {
    n == 0 || orbit.dists()[n - 1] <= 1e-12
}

pub fn count_ball(orbit: &OrbitSet, t: f64) -> Result<CountReport> {
    let n = check_radius(orbit, t)?;
    let predicted = predicted_count(&orbit.lattice, t)?;
    let bin = Bin { id: "ball".into(), lo: vec![0.0], hi: vec![t] };
    Ok(CountReport::build("count_ball", t, CountMode::Gamma, 1, vec![(bin, n as u64, predicted)], degenerate(orbit, n)))
}

fn int_mul(x: &[i64; 4], y: &[i64; 4]) -> [i64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

/// Visual angles of the points `y gamma` seen from `x`, one per element, together
/// with a flag marking one representative per point.
///
/// Elements of the same coset `(Gamma ∩ K_y) gamma` share the angle of the
/// coset's canonical representative, so both counting modes agree bin-wise.
pub struct SectorAngles {
    pub angles: Vec<f64>,
    pub representative: Vec<bool>,
    pub stabilizer: Vec<[i64; 4]>,
}

pub fn sector_angles(orbit: &OrbitSet, t: f64) -> Result<SectorAngles> {
    require_rank_one(orbit)?;
    let n = check_radius(orbit, t)?;
    let g = orbit.lattice.conjugator_block(0);
    let stab = stabilizer(orbit.lattice.kind, &g);
    let mut angles = Vec::with_capacity(n);
    let mut representative = Vec::with_capacity(n);
    for i in 0..n {
        let p = orbit.point(i);
        let gamma = p.factor_gamma(0);
        let key = stab.iter().map(|s| psl_canonical(int_mul(s, &gamma))).min().unwrap_or(gamma);
        let k2 = if key == gamma { p.angles[1] } else { sl2::kak(&sl2::mul(&g, &sl2::from_int(&key))).k2_angle() };
        angles.push(wrap_angle(PI + k2));
        representative.push(key == gamma);
    }
    Ok(SectorAngles { angles, representative, stabilizer: stab })
}

fn observer(orbit: &OrbitSet) -> Complex64 {
    boundary::point_of(&orbit.lattice.conjugator_block(0))
}

pub fn count_sector(orbit: &OrbitSet, arcs: &[Arc], t: f64, mode: CountMode) -> Result<CountReport> {
    check_partition(arcs)?;
    let sa = sector_angles(orbit, t)?;
    let mut counts = vec![0u64; arcs.len()];
    for (angle, rep) in sa.angles.iter().zip(&sa.representative) {
        if mode == CountMode::Gamma || *rep {
            counts[locate(arcs, *angle).ok_or_else(|| Error::Numeric("angle outside partition".into()))?] += 1;
        }
    }
    let total = predicted_count(&orbit.lattice, t)?;
    let divisor = if mode == CountMode::Point { sa.stabilizer.len() as f64 } else { 1.0 };
    let cells = arcs
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(k, (a, c))| (Bin::arc(format!("arc{k}"), a), c, a.len / TAU * total / divisor))
        .collect();
    Ok(CountReport::build("count_sector", t, mode, sa.stabilizer.len(), cells, degenerate(orbit, sa.angles.len())))
}

/// Sector counts of the elements with index in `range`, as an exact-weight measure.
/// Shards over a partition of `0..N(T)` merge to the serial counts.
pub fn sector_shard(orbit: &OrbitSet, arcs: &[Arc], t: f64, range: std::ops::Range<usize>) -> Result<EmpiricalMeasure> {
    check_partition(arcs)?;
    let sa = sector_angles(orbit, t)?;
    if range.end > sa.angles.len() {
        return Err(Error::invalid("shard range exceeds the ball"));
    }
    let bins = arcs.iter().enumerate().map(|(k, a)| Bin::arc(format!("arc{k}"), a)).collect();
    let mut m = EmpiricalMeasure::new(bins);
    for angle in &sa.angles[range] {
        m.add(locate(arcs, *angle).ok_or_else(|| Error::Numeric("angle outside partition".into()))?, 1.0);
    }
    Ok(m)
}

/// Boundary images `b gamma^-1` of a fixed boundary point for every orbit element.
#[derive(Clone, Debug)]
pub struct BoundaryDecoration {
    pub b: BoundaryPoint,
    pub angles: Vec<f64>,
}

pub fn decorate_boundary(orbit: &OrbitSet, b: BoundaryPoint) -> Result<BoundaryDecoration> {
    require_rank_one(orbit)?;
    let angles = orbit.iter().map(|p| boundary::boundary_action(b, &sl2::from_int(&p.factor_gamma(0)), I).angle).collect();
    Ok(BoundaryDecoration { b, angles })
}

fn check_decoration(orbit: &OrbitSet, deco: &BoundaryDecoration, n: usize) -> Result<()> {
    if deco.angles.len() < n || deco.angles.len() != orbit.len() {
        return Err(Error::invalid("boundary decoration does not match this orbit; re-run decorate_boundary"));
    }
    Ok(())
}

pub fn count_boundary(orbit: &OrbitSet, deco: &BoundaryDecoration, arcs: &[Arc], t: f64) -> Result<CountReport> {
    require_rank_one(orbit)?;
    check_partition(arcs)?;
    let n = check_radius(orbit, t)?;
    check_decoration(orbit, deco, n)?;
    let mut counts = vec![0u64; arcs.len()];
    for angle in &deco.angles[..n] {
        counts[locate(arcs, *angle).ok_or_else(|| Error::Numeric("angle outside partition".into()))?] += 1;
    }
    let total = predicted_count(&orbit.lattice, t)?;
    let y = observer(orbit);
    let cells = arcs
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(k, (a, c))| (Bin::arc(format!("arc{k}"), a), c, invariant_measure(I, y, a) * total))
        .collect();
    Ok(CountReport::build("count_boundary", t, CountMode::Gamma, 1, cells, degenerate(orbit, n)))
}

/// Joint counts on a sector x boundary grid, stored row-major by sector arc.
#[derive(Clone, Debug, Serialize)]
pub struct JointReport {
    pub report: CountReport,
    pub n_sector: usize,
    pub n_boundary: usize,
}

impl JointReport {
    pub fn sector_marginal(&self) -> Vec<u64> {
        (0..self.n_sector).map(|i| (0..self.n_boundary).map(|j| self.report.rows[i * self.n_boundary + j].observed).sum()).collect()
    }

    pub fn boundary_marginal(&self) -> Vec<u64> {
        (0..self.n_boundary).map(|j| (0..self.n_sector).map(|i| self.report.rows[i * self.n_boundary + j].observed).sum()).collect()
    }
}

pub fn count_joint(orbit: &OrbitSet, deco: &BoundaryDecoration, sector_arcs: &[Arc], boundary_arcs: &[Arc], t: f64) -> Result<JointReport> {
    check_partition(sector_arcs)?;
    check_partition(boundary_arcs)?;
    let sa = sector_angles(orbit, t)?;
    let n = sa.angles.len();
    check_decoration(orbit, deco, n)?;
    let (ns, nb) = (sector_arcs.len(), boundary_arcs.len());
    let mut counts = vec![0u64; ns * nb];
    for (s, b) in sa.angles.iter().zip(&deco.angles[..n]) {
        let i = locate(sector_arcs, *s).ok_or_else(|| Error::Numeric("angle outside partition".into()))?;
        let j = locate(boundary_arcs, *b).ok_or_else(|| Error::Numeric("angle outside partition".into()))?;
        counts[i * nb + j] += 1;
    }
    let total = predicted_count(&orbit.lattice, t)?;
    let y = observer(orbit);
    let mut cells = Vec::with_capacity(ns * nb);
    for (i, a) in sector_arcs.iter().enumerate() {
        for (j, b) in boundary_arcs.iter().enumerate() {
            let p = a.len / TAU * invariant_measure(I, y, b) * total;
            cells.push((Bin::grid(format!("s{i}b{j}"), a, b), counts[i * nb + j], p));
        }
    }
    Ok(JointReport {
        report: CountReport::build("count_joint", t, CountMode::Gamma, sa.stabilizer.len(), cells, degenerate(orbit, n)),
        n_sector: ns,
        n_boundary: nb,
    })
}

/// Counts `gamma` whose Cartan triple `g gamma = k1 a k2` has `k1` in a `omega1` arc and
/// `k2` in a `omega2` arc (angles on `K/M`), for every pair of arcs.
pub fn count_bisector(orbit: &OrbitSet, omega1: &[Arc], omega2: &[Arc], t: f64) -> Result<CountReport> {
    require_rank_one(orbit)?;
    let n = check_radius(orbit, t)?;
    let total = predicted_count(&orbit.lattice, t)?;
    let mut cells = Vec::new();
    for (i, a) in omega1.iter().enumerate() {
        for (j, b) in omega2.iter().enumerate() {
            let c = (0..n).filter(|&k| {
                let p = orbit.point(k);
                a.contains(p.angles[0]) && b.contains(p.angles[1])
            });
            let p = a.len / TAU * b.len / TAU * total;
            cells.push((Bin::grid(format!("k1_{i}_k2_{j}"), a, b), c.count() as u64, p));
        }
    }
    Ok(CountReport::build("count_bisector", t, CountMode::Gamma, 1, cells, degenerate(orbit, n)))
}

/// Rank-one factor orbits of a product lattice, counted by streaming pairs.
#[derive(Clone, Debug)]
pub struct ProductOrbit {
    pub lattice: LatticeSpec,
    pub t: f64,
    pub factors: [OrbitSet; 2],
}

impl ProductOrbit {
    pub fn enumerate(lattice: &LatticeSpec, t: f64) -> Result<Self> {
        if !lattice.kind.is_product() {
            return Err(Error::domain("product orbit needs a product lattice"));
        }
        if t > lattice.cap() {
            return Err(Error::Resource(format!("radius {t} exceeds the enumeration cap {}", lattice.cap())));
        }
        let f1 = enumerate(&lattice.factor(0), t)?;
        let f2 = enumerate(&lattice.factor(1), t)?;
        Ok(ProductOrbit { lattice: lattice.clone(), t, factors: [f1, f2] })
    }

    fn count<P>(&self, t: f64, pred: P) -> Result<u64>
    where
        P: Fn(&crate::lattice::OrbitPoint<'_>, &crate::lattice::OrbitPoint<'_>) -> bool + Sync,
    {
        if t > self.t {
            return Err(Error::MissingCache(format!("product orbit enumerated to T = {} but T = {t} requested", self.t)));
        }
        stream_count_product([&self.factors[0], &self.factors[1]], t, pred)
    }
}

pub fn count_ball_product(po: &ProductOrbit, t: f64) -> Result<CountReport> {
    let n = po.count(t, |_, _| true)?;
    let predicted = predicted_count(&po.lattice, t)?;
    let bin = Bin { id: "ball".into(), lo: vec![0.0], hi: vec![t] };
    Ok(CountReport::build("count_ball", t, CountMode::Gamma, 1, vec![(bin, n, predicted)], n <= 4))
}

/// Box `omega1[0] x omega1[1]` on the `k1` circles and `omega2[0] x omega2[1]` on the `k2` circles.
pub fn count_bisector_product(po: &ProductOrbit, omega1: [Arc; 2], omega2: [Arc; 2], t: f64) -> Result<CountReport> {
    let n = po.count(t, |p, q| {
        omega1[0].contains(p.angles[0]) && omega2[0].contains(p.angles[1]) && omega1[1].contains(q.angles[0]) && omega2[1].contains(q.angles[1])
    })?;
    let nu = omega1.iter().chain(&omega2).map(|a| a.len / TAU).product::<f64>();
    let predicted = nu * predicted_count(&po.lattice, t)?;
    let bin = Bin {
        id: "box".into(),
        lo: vec![omega1[0].start, omega1[1].start, omega2[0].start, omega2[1].start],
        hi: vec![omega1[0].end(), omega1[1].end(), omega2[0].end(), omega2[1].end()],
    };
    Ok(CountReport::build("count_bisector", t, CountMode::Gamma, 1, vec![(bin, n, predicted)], n <= 4))
}

/// Doubled angle of the `K` part of the Iwasawa decomposition `gamma = k a n`.
fn iwasawa_angle(gamma: &[i64; 4]) -> f64 {
    wrap_angle(2.0 * (gamma[2] as f64).atan2(gamma[0] as f64))
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymmetrySeries {
    pub t_grid: Vec<f64>,
    /// `k2(g gamma)` in `omega1` and Iwasawa `k(gamma)` in `omega2`.
    pub ordered_ratios: Vec<f64>,
    /// `k1(g gamma)` in `omega1` and Iwasawa `k(gamma)` in `omega2`.
    pub swapped_ratios: Vec<f64>,
}

/// Ratio of box counts to `nu(omega1) nu(omega2) N(T)` for both orders of the Cartan condition.
pub fn asymmetry_probe(po: &ProductOrbit, omega1: [Arc; 2], omega2: [Arc; 2], t_grid: &[f64]) -> Result<AsymmetrySeries> {
    let id = GroupSpec::product(&[2, 2]);
    if po.lattice.conjugator != crate::lie::GroupElement::identity(&id) {
        return Err(Error::domain("asymmetry probe is defined for the identity conjugator"));
    }
    let nu = omega1.iter().chain(&omega2).map(|a| a.len / TAU).product::<f64>();
    let mut ordered = Vec::new();
    let mut swapped = Vec::new();
    for &t in t_grid {
        let total = po.count(t, |_, _| true)? as f64 * nu;
        let iw = |p: &crate::lattice::OrbitPoint<'_>, q: &crate::lattice::OrbitPoint<'_>| {
            omega2[0].contains(iwasawa_angle(&p.factor_gamma(0))) && omega2[1].contains(iwasawa_angle(&q.factor_gamma(0)))
        };
        let o = po.count(t, |p, q| omega1[0].contains(p.angles[1]) && omega1[1].contains(q.angles[1]) && iw(p, q))?;
        let s = po.count(t, |p, q| omega1[0].contains(p.angles[0]) && omega1[1].contains(q.angles[0]) && iw(p, q))?;
        ordered.push(o as f64 / total);
        swapped.push(s as f64 / total);
    }
    Ok(AsymmetrySeries { t_grid: t_grid.to_vec(), ordered_ratios: ordered, swapped_ratios: swapped })
}

/// Rank-one asymmetry input is rejected: both orders coincide up to inversion there.
pub fn asymmetry_probe_rank_one(_orbit: &OrbitSet) -> Result<AsymmetrySeries> {
    Err(Error::domain("the one-sided counting failure needs rank at least two"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit(t: f64) -> OrbitSet {
        enumerate(&LatticeSpec::psl2z(), t).unwrap()
    }

    #[test]
    fn full_circle_sector_is_the_ball() {
        let o = orbit(6.0);
        let ball = count_ball(&o, 6.0).unwrap();
        let sector = count_sector(&o, &[Arc::full()], 6.0, CountMode::Gamma).unwrap();
        assert_eq!(ball.rows[0].observed, sector.rows[0].observed);
        assert!((ball.rows[0].predicted - sector.rows[0].predicted).abs() < 1e-9);
    }

    #[test]
    fn sector_angle_is_the_visual_angle() {
        let o = orbit(5.0);
        let sa = sector_angles(&o, 5.0).unwrap();
        for (k, p) in o.iter().enumerate().filter(|(_, p)| p.dist > 1e-9) {
            let z = boundary::point_of(&sl2::from_int(&p.factor_gamma(0)));
            let v = boundary::visual_angle(I, z).unwrap().angle;
            let d = wrap_angle(v - sa.angles[k]);
            assert!(d.min(TAU - d) < 1e-9);
        }
    }

    #[test]
    fn small_radius_flags_degenerate() {
        let o = orbit(1.0);
        let r = count_ball(&o, 0.5).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.rows[0].observed, 2);
        let p = count_sector(&o, &[Arc::full()], 0.5, CountMode::Point).unwrap();
        assert_eq!(p.rows[0].observed, 1);
    }

    #[test]
    fn overlapping_arcs_rejected() {
        let o = orbit(3.0);
        let arcs = [Arc::new(0.0, 4.0).unwrap(), Arc::new(3.0, TAU).unwrap()];
        assert!(count_sector(&o, &arcs, 3.0, CountMode::Gamma).is_err());
    }

    #[test]
    fn bisector_full_is_ball() {
        let o = orbit(6.0);
        let b = count_bisector(&o, &[Arc::full()], &[Arc::full()], 6.0).unwrap();
        assert_eq!(b.rows[0].observed, o.count_below(6.0) as u64);
    }

    #[test]
    fn measure_merge() {
        let bins = vec![Bin { id: "a".into(), lo: vec![0.0], hi: vec![1.0] }];
        let mut m = EmpiricalMeasure::new(bins.clone());
        m.add(0, 2.0);
        let mut n = EmpiricalMeasure::new(bins);
        n.add(0, 3.0);
        assert_eq!(m.merge(&n).unwrap().total, 5.0);
        assert_eq!(m.merge(&n).unwrap(), n.merge(&m).unwrap());
    }

    #[test]
    fn rank_one_asymmetry_rejected() {
        assert!(asymmetry_probe_rank_one(&orbit(1.0)).is_err());
    }
}
