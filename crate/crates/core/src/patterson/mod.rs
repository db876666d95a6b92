//! Dirichlet series over orbit distances and the measures `mu_{x,y,s}`.
//!
//! Every truncated quantity carries a tail bound from the growth model
//! `N(T) ~ c e^{delta T}`, with `delta` the volume growth exponent of the group
//! and `c` fitted from the orbit.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::boundary::{check_partition, locate, Arc};
use crate::error::{Error, Result};
use crate::experiments::{sector_angles, Bin, EmpiricalMeasure, ProductOrbit};
use crate::lattice::OrbitSet;
use crate::lie::GroupSpec;
use crate::volume::root_system;

/// Points whose tail bound exceeds this fraction of the partial sum are refused.
pub const MAX_TAIL_FRACTION: f64 = 0.25;

/// Radius of the interior cell of `ps_measure`.
pub const INTERIOR_CUTOFF: f64 = 1.0;

/// Sum in a fixed binary-tree order, independent of how the input was produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `N(T) ~ c e^{delta T}` fitted at the top of an orbit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthModel {
    pub c: f64,
    pub delta: f64,
}

impl GrowthModel {
    /// Mean of `N(t) e^{-delta t}` over 21 radii in `[0.9 T, T]`. `dists` must be sorted.
    pub fn fit(dists: &[f64], t_max: f64, delta: f64) -> Result<Self> {
        if dists.is_empty() || t_max <= 0.0 {
            return Err(Error::invalid("growth fit needs a nonempty orbit and positive radius"));
        }
        let c = (0..=20)
            .map(|k| {
                let t = t_max * (0.9 + 0.005 * k as f64);
                dists.partition_point(|d| *d < t) as f64 * (-delta * t).exp()
            })
            .sum::<f64>()
            / 21.0;
        Ok(GrowthModel { c, delta })
    }

    /// `int_T^inf e^{-s t} dN(t)` under the model.
    pub fn tail(&self, s: f64, t_max: f64) -> f64 {
        self.c * self.delta / (s - self.delta) * ((self.delta - s) * t_max).exp()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareEval {
    pub s: f64,
    pub t_max: f64,
    pub partial_sum: f64,
    pub tail_bound: f64,
}

impl PoincareEval {
    pub fn usable(&self) -> bool {
        self.tail_bound <= MAX_TAIL_FRACTION * self.partial_sum
    }
}

fn rank_one_delta(orbit: &OrbitSet) -> Result<f64> {
    if orbit.lattice.kind.is_product() {
        return Err(Error::domain("Dirichlet series here take rank-one orbits"));
    }
    Ok(root_system(&GroupSpec::sl(2)).delta)
}

fn truncated(orbit: &OrbitSet, t_max: f64) -> Result<&[f64]> {
    if t_max > orbit.t {
        return Err(Error::MissingCache(format!("orbit enumerated to T = {} but T = {t_max} requested", orbit.t)));
    }
    Ok(&orbit.dists()[..orbit.count_below(t_max)])
}

/// Partial Dirichlet sum over sorted distances below `t_max`, with the model tail.
pub fn poincare_from_dists(dists: &[f64], s: f64, t_max: f64, model: &GrowthModel) -> Result<PoincareEval> {
    if !(s > model.delta) {
        return Err(Error::domain(format!("s = {s} is not above the critical exponent {}; the series diverges", model.delta)));
    }
    let terms: Vec<f64> = dists.iter().take_while(|d| **d < t_max).map(|d| (-s * d).exp()).collect();
    Ok(PoincareEval { s, t_max, partial_sum: pairwise_sum(&terms), tail_bound: model.tail(s, t_max) })
}

pub fn poincare_partial(orbit: &OrbitSet, s: f64, t_max: f64) -> Result<PoincareEval> {
    let delta = rank_one_delta(orbit)?;
    let d = truncated(orbit, t_max)?;
    poincare_from_dists(d, s, t_max, &GrowthModel::fit(d, t_max, delta)?)
}

/// Same sum split into `shards` contiguous pieces, each summed pairwise, then added in order.
pub fn poincare_sharded(orbit: &OrbitSet, s: f64, t_max: f64, shards: usize) -> Result<f64> {
    rank_one_delta(orbit)?;
    let d = truncated(orbit, t_max)?;
    let size = d.len().div_ceil(shards.max(1)).max(1);
    let parts: Vec<f64> = d.par_chunks(size).map(|c| pairwise_sum(&c.iter().map(|x| (-s * x).exp()).collect::<Vec<_>>())).collect();
    Ok(parts.iter().sum())
}

/// Least-squares slope of `log N(t)` over 50 radii in `[T/2, T]`.
pub fn critical_exponent_from_dists(dists: &[f64], t_max: f64) -> Result<f64> {
    if t_max < 10.0 {
        return Err(Error::invalid(format!("exponent estimate needs a range of at least 10, got {t_max}")));
    }
    let pts: Vec<(f64, f64)> = (0..50)
        .map(|k| {
            let t = t_max * (0.5 + 0.5 * k as f64 / 49.0);
            (t, (dists.partition_point(|d| *d < t) as f64).ln())
        })
        .collect();
    if pts[0].1 == f64::NEG_INFINITY {
        return Err(Error::invalid("orbit is empty over the fitting range"));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

pub fn critical_exponent(orbit: &OrbitSet) -> Result<f64> {
    critical_exponent_from_dists(orbit.dists(), orbit.t)
}

#[derive(Clone, Debug, Serialize)]
pub struct PolePoint {
    pub s: f64,
    pub eval: PoincareEval,
    /// `(s - delta)^{(r+1)/2}` times the partial sum.
    pub normalized: f64,
    /// Same with the tail bound added to the partial sum.
    pub corrected: f64,
    pub usable: bool,
}

/// Normalized Dirichlet series along `s_grid` for sorted distances of a rank-`rank` orbit.
pub fn pole_order_from_dists(dists: &[f64], s_grid: &[f64], t_max: f64, model: &GrowthModel, rank: usize) -> Result<Vec<PolePoint>> {
    let exponent = (rank as f64 + 1.0) / 2.0;
    s_grid
        .iter()
        .map(|&s| {
            let eval = poincare_from_dists(dists, s, t_max, model)?;
            let f = (s - model.delta).powf(exponent);
            Ok(PolePoint {
                s,
                normalized: f * eval.partial_sum,
                corrected: f * (eval.partial_sum + eval.tail_bound),
                usable: eval.usable(),
                eval,
            })
        })
        .collect()
}

pub fn pole_order_check(orbit: &OrbitSet, s_grid: &[f64], t_max: f64) -> Result<Vec<PolePoint>> {
    let delta = rank_one_delta(orbit)?;
    let d = truncated(orbit, t_max)?;
    pole_order_from_dists(d, s_grid, t_max, &GrowthModel::fit(d, t_max, delta)?, 1)
}

/// `max / min - 1` of the tail-corrected values over usable points.
pub fn pole_spread(points: &[PolePoint]) -> f64 {
    let v: Vec<f64> = points.iter().filter(|p| p.usable).map(|p| p.corrected).collect();
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0
}

#[derive(Clone, Debug, Serialize)]
pub struct PsMeasure {
    pub s: f64,
    /// Arcs first, then the interior cell.
    pub measure: EmpiricalMeasure,
    pub tail_bound: f64,
    pub interior_mass: f64,
}

impl PsMeasure {
    /// Arc weights renormalized to the boundary part of the mass.
    pub fn boundary_weights(&self) -> Vec<f64> {
        let n = self.measure.bins.len() - 1;
        let b: f64 = self.measure.weights[..n].iter().sum();
        self.measure.weights[..n].iter().map(|w| w / b).collect()
    }

    /// `max |w_k / nu(arc_k) - 1|` for the renormalized arc weights.
    pub fn max_deviation(&self) -> f64 {
        let n = self.measure.bins.len() - 1;
        self.boundary_weights()
            .iter()
            .zip(&self.measure.bins[..n])
            .map(|(w, b)| (w / ((b.hi[0] - b.lo[0]) / (2.0 * PI)) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Smallest `s` on a `1e-3` grid above `delta` whose tail is usable.
fn minimal_usable_s(dists: &[f64], t_max: f64, model: &GrowthModel) -> Option<f64> {
    let (mut lo, mut hi) = (model.delta + 1e-6, model.delta + 50.0);
    let ok = |s: f64| poincare_from_dists(dists, s, t_max, model).map(|e| e.usable()).unwrap_or(false);
    if !ok(hi) {
        return None;
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Normalized `mu_{x,y,s}` binned by visual angle from `x = i`, with points
/// closer than `cutoff` pooled into a final interior cell.
pub fn ps_measure(orbit: &OrbitSet, s: f64, arcs: &[Arc], t_max: f64, cutoff: f64) -> Result<PsMeasure> {
    check_partition(arcs)?;
    let delta = rank_one_delta(orbit)?;
    let d = truncated(orbit, t_max)?;
    let model = GrowthModel::fit(d, t_max, delta)?;
    let eval = poincare_from_dists(d, s, t_max, &model)?;
    if !eval.usable() {
        let hint = minimal_usable_s(d, t_max, &model).map_or("none".to_string(), |v| format!("{v:.3}"));
        return Err(Error::domain(format!("tail bound {:.3e} exceeds 25% of the partial sum at s = {s}; minimal usable s is {hint}", eval.tail_bound)));
    }
    let sa = sector_angles(orbit, t_max)?;
    let n = arcs.len();
    let mut terms: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for (k, dist) in d.iter().enumerate() {
        let w = (-s * dist).exp();
        let bin = if *dist < cutoff { n } else { locate(arcs, sa.angles[k]).ok_or_else(|| Error::Numeric("angle outside partition".into()))? };
        terms[bin].push(w);
    }
    let mut bins: Vec<Bin> = arcs.iter().enumerate().map(|(k, a)| Bin { id: format!("arc{k}"), lo: vec![a.start], hi: vec![a.end()] }).collect();
    bins.push(Bin { id: "interior".into(), lo: vec![0.0], hi: vec![cutoff] });
    let mut m = EmpiricalMeasure::new(bins);
    let total = eval.partial_sum;
    for (k, t) in terms.iter().enumerate() {
        m.add(k, pairwise_sum(t) / total);
    }
    let interior_mass = m.weights[n];
    Ok(PsMeasure { s, measure: m, tail_bound: eval.tail_bound / total, interior_mass })
}

/// `mu_{x,y,s}` of a product orbit binned by the chamber direction
/// `atan2(d2, d1)` in `[0, pi/2]`; the barycenter direction is `pi/4`.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionHistogram {
    pub s: f64,
    pub t_max: f64,
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DirectionHistogram {
    /// Normalized mass within `width` of the barycenter direction.
    pub fn mass_near_barycenter(&self, width: f64) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.weights)
            .filter(|(e, _)| (0.5 * (e[0] + e[1]) - FRAC_PI_4).abs() < width)
            .map(|(_, w)| w)
            .sum()
    }
}

pub fn direction_histogram(po: &ProductOrbit, s: f64, t_max: f64, bins: usize) -> Result<DirectionHistogram> {
    let delta = root_system(&GroupSpec::product(&[2, 2])).delta;
    if !(s > delta) {
        return Err(Error::domain(format!("s = {s} is not above the critical exponent {delta}")));
    }
    if t_max > po.t {
        return Err(Error::MissingCache(format!("product orbit enumerated to T = {} but T = {t_max} requested", po.t)));
    }
    if bins == 0 {
        return Err(Error::invalid("need at least one direction bin"));
    }
    let (d1, d2) = (po.factors[0].dists(), po.factors[1].dists());
    let n1 = d1.partition_point(|d| *d < t_max);
    let width = FRAC_PI_4 * 2.0 / bins as f64;
    let rows: Vec<Vec<f64>> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let mut h = vec![0.0; bins];
            let a = d1[i];
            let n2 = d2.partition_point(|d| a.hypot(*d) < t_max);
            for b in &d2[..n2] {
                if a == 0.0 && *b == 0.0 {
                    continue;
                }
                let k = ((b.atan2(a) / width) as usize).min(bins - 1);
                h[k] += (-s * a.hypot(*b)).exp();
            }
            h
        })
        .collect();
    let mut weights = vec![0.0; bins];
    for r in &rows {
        for (w, x) in weights.iter_mut().zip(r) {
            *w += x;
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(DirectionHistogram { s, t_max, edges: (0..=bins).map(|k| k as f64 * width).collect(), weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<f64> = (1..1000).map(|k| 1.0 / k as f64).collect();
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn planted_exponent() {
        for delta in [0.5, 1.0, 1.3] {
            let d: Vec<f64> = (1..2_000_000u64).map(|k| (k as f64).ln() / delta).collect();
            let t = d.last().unwrap() * 0.999;
            let est = critical_exponent_from_dists(&d, t).unwrap();
            assert!((est - delta).abs() < 1e-3, "{est} vs {delta}");
        }
    }

    #[test]
    fn planted_pole_series_is_flat() {
        // N(t) = m (e^t - 1) sampled at midpoints; the Dirichlet series is m / (s - 1).
        let m = 100.0;
        let t_max: f64 = 10.0;
        let count = (m * (t_max.exp() - 1.0)) as u64;
        let d: Vec<f64> = (0..count).map(|k| (1.0 + (k as f64 + 0.5) / m).ln()).collect();
        let model = GrowthModel::fit(&d, t_max, 1.0).unwrap();
        let pts = pole_order_from_dists(&d, &[1.5, 1.35, 1.25, 1.2], t_max, &model, 1).unwrap();
        for p in &pts {
            assert!((p.corrected / m - 1.0).abs() < 1e-3, "{}", p.corrected / m);
        }
    }

    #[test]
    fn divergent_s_refused() {
        let model = GrowthModel { c: 3.0, delta: 1.0 };
        assert!(poincare_from_dists(&[0.0, 1.0], 1.0, 2.0, &model).is_err());
    }
}
