//! Sampling probes for the stability of Cartan components under small
//! perturbations, away from and on the chamber walls.
//!
//! Perturbations `h = g exp(X)` (right side) and `h = exp(X) g` (left side) use
//! `X` on the sphere of Frobenius radius `o_radius` in the Lie algebra, the
//! extreme case of the ball. Components are compared modulo `M`: `k1` through the
//! right coset `k1 M`, `k2` through the left coset `M k2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lie::chamber::fundamental_coweights;
use crate::lie::compact::{distance_to_left_coset, distance_to_right_coset, exp_algebra, haar_k, random_algebra_direction};
use crate::lie::{cartan_decompose, chamber_margin, distance, distance_to_origin, GroupElement, GroupSpec};

/// Default upper bound on `|log a|` for sampled chamber elements.
pub const MAX_A_NORM: f64 = 20.0;

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r
}

/// Random `a_log` with every simple root at least `c` and norm at most `max_norm`.
/// Falls back to the smallest admissible point when `c` is too large for the bound.
pub fn sample_chamber<R: Rng + ?Sized>(spec: &GroupSpec, c: f64, max_norm: f64, rng: &mut R) -> Vec<f64> {
    let w = fundamental_coweights(spec);
    let combine = |coef: &[f64]| {
        let mut v = vec![0.0; spec.ambient_dim()];
        for (wk, ck) in w.iter().zip(coef) {
            v.iter_mut().zip(wk).for_each(|(x, y)| *x += ck * y);
        }
        v
    };
    let spread = max_norm.min(10.0);
    for _ in 0..1000 {
        let coef: Vec<f64> = (0..w.len()).map(|_| c + rng.random_range(0.0..spread)).collect();
        let v = combine(&coef);
        if spec.norm(&v) <= max_norm {
            return v;
        }
    }
    combine(&vec![c; w.len()])
}

#[derive(Clone, Debug, Serialize)]
pub struct WavefrontConfig {
    /// Minimal chamber margin of the sampled `a`.
    pub c: f64,
    pub u_radius: f64,
    pub v_radius: f64,
    pub o_radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub max_a_norm: f64,
}

impl WavefrontConfig {
    pub fn new(c: f64, u_radius: f64, v_radius: f64, o_radius: f64, samples: usize, seed: u64) -> Self {
        WavefrontConfig { c, u_radius, v_radius, o_radius, samples, seed, max_a_norm: MAX_A_NORM }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SideReport {
    pub passes: usize,
    pub worst_k1: f64,
    pub worst_a: f64,
    pub worst_k2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WavefrontReport {
    pub config: WavefrontConfig,
    /// `h = g exp(X)`.
    pub right: SideReport,
    /// `h = exp(X) g`.
    pub left: SideReport,
    /// Largest relative gap between the probe's `|log a'|` and `d(K, Kh)`
    /// recomputed from the explicit product `h`.
    pub recompute_gap: f64,
}

impl WavefrontReport {
    pub fn passed(&self) -> bool {
        self.right.passes == self.config.samples && self.left.passes == self.config.samples
    }
}

struct Outcome {
    dk1: f64,
    da: f64,
    dk2: f64,
    gap: f64,
}

/// Compares the Cartan triple of `h = k1 mid k2` with `(k1, a, k2)`, where `mid` is
/// `exp(a_log)` times a matrix near the identity. Decomposing `mid = u a' w` keeps
/// the small singular values accurate; `k1 u` and `w k2` are the components of `h`.
fn compare(spec: &GroupSpec, k1: &GroupElement, a_log: &[f64], k2: &GroupElement, mid: &GroupElement) -> Result<Outcome> {
    let id = GroupElement::identity(spec);
    let t = cartan_decompose(mid)?;
    let diff: Vec<f64> = t.a_log.iter().zip(a_log).map(|(x, y)| x - y).collect();
    let h = k1.mul(mid).mul(k2);
    Ok(Outcome {
        dk1: distance_to_right_coset(&t.k1, &id),
        da: spec.norm(&diff),
        dk2: distance_to_left_coset(&t.k2, &id),
        gap: (t.mu_norm - distance_to_origin(&h)?).abs() / t.mu_norm.max(1.0),
    })
}

fn fold_side(side: &mut SideReport, o: &Outcome, u: f64, v: f64) {
    if o.dk1 <= u && o.da <= v && o.dk2 <= u {
        side.passes += 1;
    }
    side.worst_k1 = side.worst_k1.max(o.dk1);
    side.worst_a = side.worst_a.max(o.da);
    side.worst_k2 = side.worst_k2.max(o.dk2);
}

pub fn wavefront_check(spec: &GroupSpec, cfg: &WavefrontConfig) -> Result<WavefrontReport> {
    let outcomes: Vec<Result<(Outcome, Outcome)>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.seed, i);
            let a_log = sample_chamber(spec, cfg.c, cfg.max_a_norm, &mut rng);
            let k1 = haar_k(spec, &mut rng);
            let k2 = haar_k(spec, &mut rng);
            let a = GroupElement::exp_diag(spec, &a_log)?;
            let x = exp_algebra(spec, &random_algebra_direction(spec, cfg.o_radius, false, &mut rng));
            // g exp(X) = k1 (a k2 exp(X) k2^-1) k2 and exp(X) g = k1 (k1^-1 exp(X) k1 a) k2.
            let right = compare(spec, &k1, &a_log, &k2, &a.mul(&k2.mul(&x).mul(&k2.inverse())))?;
            let left = compare(spec, &k1, &a_log, &k2, &k1.inverse().mul(&x).mul(&k1).mul(&a))?;
            Ok((right, left))
        })
        .collect();
    let mut rep = WavefrontReport { config: cfg.clone(), right: SideReport::default(), left: SideReport::default(), recompute_gap: 0.0 };
    for o in outcomes {
        let (r, l) = o?;
        fold_side(&mut rep.right, &r, cfg.u_radius, cfg.v_radius);
        fold_side(&mut rep.left, &l, cfg.u_radius, cfg.v_radius);
        rep.recompute_gap = rep.recompute_gap.max(r.gap).max(l.gap);
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusSearch {
    /// Largest passing radius found, `0` if even the lower bracket fails.
    pub radius: f64,
    pub report: Option<WavefrontReport>,
}

/// Bisection in `log o_radius` over `[1e-6, 1]` for the largest radius where
/// every sample passes on both sides, with matched seeds at every step.
/// `cfg.o_radius` is ignored.
pub fn search_radius(spec: &GroupSpec, cfg: &WavefrontConfig) -> Result<RadiusSearch> {
    let run = |o: f64| wavefront_check(spec, &WavefrontConfig { o_radius: o, ..cfg.clone() });
    let (mut lo, mut hi) = (1e-6f64.ln(), 0.0f64);
    let top = run(1.0)?;
    if top.passed() {
        return Ok(RadiusSearch { radius: 1.0, report: Some(top) });
    }
    let bottom = run(lo.exp())?;
    if !bottom.passed() {
        return Ok(RadiusSearch { radius: 0.0, report: None });
    }
    let mut best = bottom;
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        let r = run(mid.exp())?;
        if r.passed() {
            lo = mid;
            best = r;
        } else {
            hi = mid;
        }
    }
    Ok(RadiusSearch { radius: best.config.o_radius, report: Some(best) })
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub o_radius: f64,
    pub a_log: Vec<f64>,
    /// Distance of the perturbed `k2` from `M k2`.
    pub k2_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WallProbe {
    pub a_log: Vec<f64>,
    pub margin: f64,
    pub u_radius: f64,
    pub o_radii: Vec<f64>,
    /// Strongest witness per radius, if any sample left `U M`.
    pub witnesses: Vec<Option<Witness>>,
}

impl WallProbe {
    pub fn every_radius_witnessed(&self) -> bool {
        self.witnesses.iter().all(Option::is_some)
    }
}

/// `a_log` with exactly one vanishing simple root (the first), others equal to one.
/// Rank-one groups get `a = e`.
pub fn wall_point(spec: &GroupSpec) -> Vec<f64> {
    let w = fundamental_coweights(spec);
    let mut v = vec![0.0; spec.ambient_dim()];
    for wk in w.iter().skip(1) {
        v.iter_mut().zip(wk).for_each(|(x, y)| *x += y);
    }
    v
}

/// Searches `h = exp(X) a` with `|X| = o` for `k2(h)` outside `U M`.
pub fn probe_at(spec: &GroupSpec, a_log: &[f64], u_radius: f64, o_radii: &[f64], samples: usize, seed: u64) -> Result<WallProbe> {
    let a = GroupElement::exp_diag(spec, a_log)?;
    let id = GroupElement::identity(spec);
    let mut witnesses = Vec::with_capacity(o_radii.len());
    for (j, &o) in o_radii.iter().enumerate() {
        let dists: Vec<Result<f64>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(seed.wrapping_add(j as u64), i);
                let x = exp_algebra(spec, &random_algebra_direction(spec, o, false, &mut rng));
                Ok(distance_to_left_coset(&cartan_decompose(&x.mul(&a))?.k2, &id))
            })
            .collect();
        let mut best: Option<f64> = None;
        for d in dists {
            let d = d?;
            if d > u_radius && best.is_none_or(|b| d > b) {
                best = Some(d);
            }
        }
        witnesses.push(best.map(|k2_distance| Witness { o_radius: o, a_log: a_log.to_vec(), k2_distance }));
    }
    Ok(WallProbe { a_log: a_log.to_vec(), margin: chamber_margin(spec, a_log), u_radius, o_radii: o_radii.to_vec(), witnesses })
}

/// Radii `1e-1, 1e-2, ..., 1e-6`.
pub fn default_wall_radii() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

pub fn wall_failure_probe(spec: &GroupSpec, u_radius: f64, samples: usize, seed: u64) -> Result<WallProbe> {
    probe_at(spec, &wall_point(spec), u_radius, &default_wall_radii(), samples, seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReport {
    pub c: f64,
    pub u0_radius: f64,
    pub samples: usize,
    /// Smallest `d(Kak, Ka)` seen with `k` outside `U0 M`.
    pub epsilon: f64,
    /// Fresh-seed samples with `d(Kak, Ka) < epsilon` and `k` outside `U0 M`.
    pub violations: usize,
}

fn k_on_sphere<R: Rng + ?Sized>(spec: &GroupSpec, u0: f64, rng: &mut R) -> GroupElement {
    let id = GroupElement::identity(spec);
    let dir = random_algebra_direction(spec, 1.0, false, rng);
    let skew: Vec<_> = dir.iter().map(|b| (b - b.transpose()) * 0.5).collect();
    let at = |s: f64| exp_algebra(spec, &skew.iter().map(|b| b * s).collect::<Vec<_>>());
    let (mut lo, mut hi) = (0.0, u0);
    while distance_to_right_coset(&at(hi), &id) < u0 && hi < 10.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if distance_to_right_coset(&at(mid), &id) < u0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

/// `(d(Kak, Ka), dist(k, M))` for one random `a` in `A+(c)` and `k` either Haar or
/// on the `U0` sphere around `M`.
fn rigidity_sample(spec: &GroupSpec, c: f64, u0: f64, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let a = GroupElement::exp_diag(spec, &sample_chamber(spec, c, MAX_A_NORM, rng))?;
    let k = if rng.random_bool(0.5) { haar_k(spec, rng) } else { k_on_sphere(spec, u0 * (1.0 + 1e-9), rng) };
    let d = distance(&a.mul(&k), &a)?;
    Ok((d, distance_to_right_coset(&k, &GroupElement::identity(spec))))
}

pub fn angular_rigidity(spec: &GroupSpec, c: f64, u0_radius: f64, samples: usize, seed: u64) -> Result<RigidityReport> {
    let draw = |s: u64| -> Result<Vec<(f64, f64)>> { (0..samples).into_par_iter().map(|i| rigidity_sample(spec, c, u0_radius, &mut rng_for(s, i))).collect() };
    let epsilon = draw(seed)?.iter().filter(|(_, u)| *u > u0_radius).map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
    let violations = draw(seed ^ 0x5eed)?.iter().filter(|(d, u)| *d < epsilon && *u > u0_radius).count();
    Ok(RigidityReport { c, u0_radius, samples, epsilon, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_chamber_respects_margin() {
        let spec = GroupSpec::sl(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = sample_chamber(&spec, 1.0, MAX_A_NORM, &mut rng);
            assert!(chamber_margin(&spec, &v) >= 1.0 - 1e-12);
            assert!(spec.norm(&v) <= MAX_A_NORM);
        }
    }

    #[test]
    fn zero_radius_passes() {
        let r = wavefront_check(&GroupSpec::sl(3), &WavefrontConfig::new(1.0, 1e-6, 1e-6, 0.0, 200, 3)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn wall_points() {
        assert_eq!(wall_point(&GroupSpec::sl(2)), vec![0.0, 0.0]);
        let s3 = GroupSpec::sl(3);
        let w = wall_point(&s3);
        assert!(chamber_margin(&s3, &w).abs() < 1e-12);
        assert!((w[1] - w[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_elements_do_not_move_the_point() {
        let spec = GroupSpec::sl(3);
        let a = GroupElement::exp_diag(&spec, &[2.0, 0.0, -2.0]).unwrap();
        let m = GroupElement::from_rows(3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(distance(&a.mul(&m), &a).unwrap() < 1e-12);
    }
}
