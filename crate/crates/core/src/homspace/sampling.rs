//! Seeded Monte Carlo experiments on the modular surface.
//!
//! Samples are drawn in chunks of `CHUNK`; chunk `c` uses the ChaCha8 stream `c`
//! of the master seed, so results do not depend on the thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};
use std::f64::consts::TAU;

use super::{reduce_point, DomainBins, ReducedPoint};
use crate::boundary::{mobius, Arc, I};
use crate::error::{Error, Result};
use crate::experiments::EmpiricalMeasure;
use crate::lie::sl2::{self, Mat2};

pub const CHUNK: usize = 1 << 16;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(chunk as u64);
    r
}

/// Runs `body` on every chunk and adds the per-chunk integer tallies.
fn tally<F>(samples: usize, seed: u64, width: usize, body: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng, usize, &mut [u64]) -> Result<()> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut acc = vec![0u64; width];
            body(&mut rng, n, &mut acc)?;
            Ok(acc)
        })
        .collect();
    let mut total = vec![0u64; width];
    for p in parts {
        for (t, x) in total.iter_mut().zip(p?) {
            *t += x;
        }
    }
    Ok(total)
}

fn to_measure(bins: &DomainBins, counts: &[u64]) -> EmpiricalMeasure {
    let mut m = bins.empty_measure();
    for (k, c) in counts.iter().enumerate() {
        m.add(k, *c as f64);
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslateStep {
    pub margin: f64,
    pub samples: usize,
    pub measure: EmpiricalMeasure,
    pub max_deviation: f64,
}

/// Pushforward of uniform `k` in `u` under `k -> y k a`, `a = diag(e^{m/2}, e^{-m/2})`
/// (chamber margin `m`), reduced and binned, for each margin in `margins`.
pub fn translate_equidistribution(y: &ReducedPoint, margins: &[f64], u: Arc, bins: &DomainBins, samples: usize, seed: u64) -> Result<Vec<TranslateStep>> {
    if margins.windows(2).any(|w| w[1] <= w[0]) || margins.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::invalid("margins must be non-negative and increasing"));
    }
    margins
        .iter()
        .map(|&m| {
            let a = sl2::diag(0.5 * m);
            let counts = tally(samples, seed, bins.len(), |rng, n, acc| {
                for _ in 0..n {
                    let theta = u.start + u.len * rng.random::<f64>();
                    let h = sl2::mul(&sl2::mul(&y.rep, &sl2::rotation(theta)), &a);
                    let (z, _) = reduce_point(mobius(&h, I))?;
                    acc[bins.locate(z)] += 1;
                }
                Ok(())
            })?;
            let measure = to_measure(bins, &counts);
            Ok(TranslateStep { margin: m, samples, max_deviation: bins.max_deviation(&measure), measure })
        })
        .collect()
}

/// Rejection box for `Q_T(g)` in the right-Haar coordinates `b = [[alpha, beta], [0, 1/alpha]]`,
/// where `rho = d alpha d beta`.
fn solvable_box(g: &Mat2, t: f64) -> f64 {
    let op = sl2::kak(g).t.exp();
    op * (2.0 * t.cosh()).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct SolvableSweep {
    pub t: f64,
    pub omega: Arc,
    pub samples: usize,
    /// Reduced points `y b^-1` for `b` in `Q_T(g, omega)`.
    pub measure: EmpiricalMeasure,
    pub max_deviation: f64,
    pub rho_omega: f64,
    pub rho_total: f64,
    /// `rho(Q_T(g, omega)) / rho(Q_T(g))` and its binomial standard error.
    pub arc_ratio: f64,
    pub arc_ratio_se: f64,
}

/// One accepted sample: `d(K, K g b)`, the `k2` angle of `g b`, and the reduced `y b^-1`.
#[derive(Clone, Copy, Debug)]
pub struct SolvableSample {
    pub dist: f64,
    pub k2_angle: f64,
    pub z: Complex64,
}

fn draw(rng: &mut ChaCha8Rng, g: &Mat2, y: &Mat2, t: f64, r: f64) -> Result<Option<SolvableSample>> {
    let alpha = 1.0 / r + (r - 1.0 / r) * rng.random::<f64>();
    let beta = r * (2.0 * rng.random::<f64>() - 1.0);
    let b = [alpha, beta, 0.0, 1.0 / alpha];
    let h = sl2::mul(g, &b);
    let k = sl2::kak(&h);
    if k.distance() >= t {
        return Ok(None);
    }
    let (z, _) = reduce_point(mobius(&sl2::mul(y, &sl2::inverse(&b)), I))?;
    Ok(Some(SolvableSample { dist: k.distance(), k2_angle: k.k2_angle(), z }))
}

pub fn solvable_sweep(g: &Mat2, y: &Mat2, t: f64, omega: Arc, bins: &DomainBins, samples: usize, seed: u64) -> Result<SolvableSweep> {
    if !(t > 0.0) || samples == 0 {
        return Err(Error::invalid("need a positive radius and sample count"));
    }
    let r = solvable_box(g, t);
    let nb = bins.len();
    let counts = tally(samples, seed, nb + 2, |rng, n, acc| {
        for _ in 0..n {
            if let Some(s) = draw(rng, g, y, t, r)? {
                acc[nb] += 1;
                if omega.contains(s.k2_angle) {
                    acc[nb + 1] += 1;
                    acc[bins.locate(s.z)] += 1;
                }
            }
        }
        Ok(())
    })?;
    let (in_ball, in_omega) = (counts[nb], counts[nb + 1]);
    if in_omega == 0 {
        return Err(Error::domain(format!("no samples landed in Q_T(g, omega) at T = {t}; the set is empty or too small")));
    }
    let area = (r - 1.0 / r) * 2.0 * r;
    let measure = to_measure(bins, &counts[..nb]);
    let p = in_omega as f64 / in_ball as f64;
    Ok(SolvableSweep {
        t,
        omega,
        samples,
        max_deviation: bins.max_deviation(&measure),
        measure,
        rho_omega: area * in_omega as f64 / samples as f64,
        rho_total: area * in_ball as f64 / samples as f64,
        arc_ratio: p,
        arc_ratio_se: (p * (1.0 - p) / in_ball as f64).sqrt(),
    })
}

/// Accepted samples of `Q_T(g)` from `samples` proposals, in chunk order.
pub fn solvable_samples(g: &Mat2, y: &Mat2, t: f64, samples: usize, seed: u64) -> Result<Vec<SolvableSample>> {
    let r = solvable_box(g, t);
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<SolvableSample>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut out = Vec::new();
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                if let Some(s) = draw(&mut rng, g, y, t, r)? {
                    out.push(s);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test on binned counts.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 || a.len() != b.len() {
        return Err(Error::invalid("two-sample test needs nonempty samples over the same bins"));
    }
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    let mut used = 0;
    for (x, y) in a.iter().zip(b) {
        if x + y > 0 {
            stat += (ka * *x as f64 - kb * *y as f64).powi(2) / (x + y) as f64;
            used += 1;
        }
    }
    let dof = used.max(2) - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(ChiSquareResult { statistic: stat, dof, p_value: 1.0 - chi.cdf(stat) })
}

pub fn counts_of(bins: &DomainBins, zs: impl Iterator<Item = Complex64>) -> Vec<u64> {
    let mut c = vec![0u64; bins.len()];
    for z in zs {
        c[bins.locate(z)] += 1;
    }
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub trials: usize,
    pub exceed_3sigma: usize,
    /// Largest exceedance count consistent with a correct measure at the 0.1% level.
    pub allowance: usize,
    pub worst_z: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.exceed_3sigma <= self.allowance
    }
}

/// Mean and standard error of `area * f` over uniform samples of a box, restricted by `keep`.
fn box_mass<R: Rng>(rng: &mut R, lo: [f64; 2], hi: [f64; 2], n: usize, f: &dyn Fn(f64, f64) -> f64, keep: &dyn Fn(f64, f64) -> bool) -> (f64, f64) {
    let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let a = lo[0] + (hi[0] - lo[0]) * rng.random::<f64>();
        let b = lo[1] + (hi[1] - lo[1]) * rng.random::<f64>();
        let v = if keep(a, b) { area * f(a, b) } else { 0.0 };
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    (mean, ((s2 / n as f64 - mean * mean).max(0.0) / n as f64).sqrt())
}

/// Compares `int_S f` with `int_{S b0} f` for random boxes `S` and right translations `b0`
/// of `B`, in coordinates `b = [[alpha, beta], [0, 1/alpha]]`.
pub fn right_invariance_check(density: &(dyn Fn(f64, f64) -> f64 + Sync), trials: usize, samples: usize, seed: u64) -> Result<InvarianceReport> {
    let zs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let a0 = rng.random_range(0.5..2.0);
            let b0 = rng.random_range(-1.0..1.0);
            let lo = [a0, b0];
            let hi = [a0 + rng.random_range(0.2..1.0), b0 + rng.random_range(0.2..1.0)];
            let (ta, tb) = (rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
            // (alpha, beta) (ta, tb) = (alpha ta, alpha tb + beta / ta).
            let corners = [(lo[0], lo[1]), (lo[0], hi[1]), (hi[0], lo[1]), (hi[0], hi[1])].map(|(a, b)| (a * ta, a * tb + b / ta));
            let ilo = [lo[0] * ta, corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min)];
            let ihi = [hi[0] * ta, corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max)];
            let inside = |a: f64, b: f64| {
                let (sa, sb) = (a / ta, (b - a / ta * tb) * ta);
                sa >= lo[0] && sa < hi[0] && sb >= lo[1] && sb < hi[1]
            };
            let (m1, e1) = box_mass(&mut rng, lo, hi, samples, density, &|_, _| true);
            let (m2, e2) = box_mass(&mut rng, ilo, ihi, samples, density, &inside);
            (m1 - m2) / e1.hypot(e2)
        })
        .collect();
    let p = 2.0 * (1.0 - statrs::function::erf::erf(3.0 / 2f64.sqrt())) / 2.0;
    let bin = Binomial::new(p, trials as u64).map_err(|e| Error::Numeric(e.to_string()))?;
    let allowance = (0..=trials as u64).find(|k| 1.0 - bin.cdf(*k) < 1e-3).unwrap_or(trials as u64) as usize;
    Ok(InvarianceReport {
        trials,
        exceed_3sigma: zs.iter().filter(|z| z.abs() > 3.0).count(),
        allowance,
        worst_z: zs.iter().map(|z| z.abs()).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KsResult {
    pub samples: usize,
    pub statistic: f64,
    pub critical_1pct: f64,
}

impl KsResult {
    pub fn passed(&self) -> bool {
        self.statistic < self.critical_1pct
    }
}

/// Samples `k b` with `k` uniform on `K` and `b` from `rho` restricted to `d(K, K b) < t`,
/// and tests the law of `d(K, K k b)` against the Haar radial law `(cosh r - 1) / (cosh t - 1)`.
pub fn radial_law_ks(t: f64, samples: usize, seed: u64) -> Result<KsResult> {
    let id = [1.0, 0.0, 0.0, 1.0];
    let r = solvable_box(&id, t);
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let want = CHUNK.min(samples - c * CHUNK);
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                let alpha = 1.0 / r + (r - 1.0 / r) * rng.random::<f64>();
                let beta = r * (2.0 * rng.random::<f64>() - 1.0);
                let k = sl2::rotation(TAU * rng.random::<f64>());
                let d = sl2::distance(&sl2::mul(&k, &[alpha, beta, 0.0, 1.0 / alpha]));
                if d < t {
                    out.push(d);
                }
            }
            out
        })
        .collect();
    let mut d: Vec<f64> = parts.into_iter().flatten().collect();
    d.sort_by(f64::total_cmp);
    let n = d.len() as f64;
    let norm = t.cosh() - 1.0;
    let stat = d
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let f = (r.cosh() - 1.0) / norm;
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult { samples: d.len(), statistic: stat, critical_1pct: 1.6276 / n.sqrt() })
}
