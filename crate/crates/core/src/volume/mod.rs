//! Root-system data and the volume side of the counting asymptotics.
//!
//! Volumes are `integral of xi(t) dt` over regions of the closed chamber, where
//! `xi(t) = prod sinh(alpha(t))^{m_alpha}` and `dt` is Lebesgue measure for
//! the metric-scaled inner product on the Cartan subspace.

pub mod fit;
pub mod quadrature;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::chamber::{fundamental_coweights, positive_roots, simple_roots, Root};
use crate::lie::GroupSpec;
use quadrature::{integrate, Tolerance};

pub use fit::{asymptotic_fit, free_exponent_fit, AsymptoticFit, FreeExponentFit};

#[derive(Clone, Debug)]
pub struct RootSystemData {
    pub spec: GroupSpec,
    pub positive_roots: Vec<Root>,
    /// Coefficients of `2 rho` as a functional: `2 rho(t) = sum two_rho[i] * t[i]`.
    pub two_rho: Vec<f64>,
    pub rank_r: usize,
    pub delta: f64,
    pub barycenter: Vec<f64>,
}

pub fn root_system(spec: &GroupSpec) -> RootSystemData {
    let roots = positive_roots(spec);
    let mut two_rho = vec![0.0; spec.ambient_dim()];
    for r in &roots {
        two_rho[r.i] += r.multiplicity as f64;
        two_rho[r.j] -= r.multiplicity as f64;
    }
    // Riesz representative of 2 rho in the scaled inner product.
    let mut h = two_rho.clone();
    for (b, f) in spec.factors().iter().enumerate() {
        for v in &mut h[spec.block_range(b)] {
            *v /= f.metric_scale * f.metric_scale;
        }
    }
    let delta = spec.norm(&h);
    let barycenter = h.iter().map(|v| v / delta).collect();
    RootSystemData { spec: spec.clone(), positive_roots: roots, two_rho, rank_r: spec.rank(), delta, barycenter }
}

impl RootSystemData {
    pub fn two_rho_at(&self, t: &[f64]) -> f64 {
        self.two_rho.iter().zip(t).map(|(c, x)| c * x).sum()
    }

    /// `xi(t) * exp(-shift)`, computed in log space so large `t` cannot overflow.
    fn scaled_xi(&self, t: &[f64], shift: f64) -> f64 {
        let mut log = -shift;
        for r in &self.positive_roots {
            let a = r.eval(t);
            if a <= 0.0 {
                return 0.0;
            }
            log += r.multiplicity as f64 * log_sinh(a);
        }
        log.exp()
    }
}

fn log_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

pub fn density_xi(rs: &RootSystemData, t: &[f64]) -> Result<f64> {
    rs.spec.check_algebra_vector(t)?;
    let tol = 1e-12 * (1.0 + rs.spec.norm(t));
    if simple_roots(&rs.spec).iter().any(|r| r.eval(t) < -tol) {
        return Err(Error::domain("point lies outside the closed positive chamber"));
    }
    Ok(rs
        .positive_roots
        .iter()
        .map(|r| r.eval(t).max(0.0).sinh().powi(r.multiplicity as i32))
        .product())
}

/// A simplicial subcone of the closed chamber.
#[derive(Clone, Debug)]
pub enum ChamberCone {
    Full,
    /// Spanned by `rank` linearly independent chamber vectors.
    Simplicial(Vec<Vec<f64>>),
}

impl ChamberCone {
    fn generators(&self, rs: &RootSystemData) -> Result<Vec<Vec<f64>>> {
        let gens = match self {
            ChamberCone::Full => fundamental_coweights(&rs.spec),
            ChamberCone::Simplicial(g) => g.clone(),
        };
        if gens.len() != rs.rank_r {
            return Err(Error::domain(format!("cone needs {} generators, got {}", rs.rank_r, gens.len())));
        }
        for g in &gens {
            rs.spec.check_algebra_vector(g)?;
        }
        Ok(gens)
    }
}

fn gram(spec: &GroupSpec, gens: &[Vec<f64>]) -> DMatrix<f64> {
    let r = gens.len();
    DMatrix::from_fn(r, r, |i, j| spec.inner(&gens[i], &gens[j]))
}

/// Coordinates of `v` in the basis `gens`, via the Gram system.
fn cone_coordinates(spec: &GroupSpec, gens: &[Vec<f64>], v: &[f64]) -> Option<Vec<f64>> {
    let g = gram(spec, gens);
    let rhs = DMatrix::from_fn(gens.len(), 1, |i, _| spec.inner(&gens[i], v));
    g.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}

fn combine(gens: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; gens[0].len()];
    for (g, ck) in gens.iter().zip(c) {
        for (vi, gi) in v.iter_mut().zip(g) {
            *vi += ck * gi;
        }
    }
    v
}

const OUTER_TOL: Tolerance = Tolerance { rel: 1e-9, abs: 0.0, max_depth: 40 };
const INNER_TOL: Tolerance = Tolerance { rel: 1e-11, abs: 0.0, max_depth: 50 };

/// `integral of xi * exp(-shift)` over `{t in cone : |t| < T, simple roots >= C}`.
fn scaled_cone_integral(rs: &RootSystemData, gens: &[Vec<f64>], t_max: f64, c_min: f64, shift: f64) -> Result<f64> {
    let simple = simple_roots(&rs.spec);
    let jac = gram(&rs.spec, gens).determinant().abs().sqrt();
    let r = rs.rank_r;
    // Polar coordinates in the cone: t = rho * sum c_k g_k with c on the standard simplex.
    let radial = |c: &[f64]| -> Result<f64> {
        let v = combine(gens, c);
        let norm = rs.spec.norm(&v);
        if norm <= 0.0 {
            return Ok(0.0);
        }
        let hi = t_max / norm;
        let mut lo = 0.0f64;
        if c_min > 0.0 {
            for s in &simple {
                let a = s.eval(&v);
                if a <= 0.0 {
                    return Ok(0.0);
                }
                lo = lo.max(c_min / a);
            }
        }
        if lo >= hi {
            return Ok(0.0);
        }
        let mut t = vec![0.0; v.len()];
        let (val, _) = integrate(
            |rho| {
                for (ti, vi) in t.iter_mut().zip(&v) {
                    *ti = rho * vi;
                }
                rs.scaled_xi(&t, shift) * rho.powi(r as i32 - 1)
            },
            lo,
            hi,
            INNER_TOL,
        )?;
        Ok(val)
    };
    let mut c = vec![0.0; r];
    let val = simplex_integral(&radial, &mut c, 0, 1.0)?;
    Ok(jac * val)
}

/// Nested integral over `{c_k >= 0, sum c_k = 1}` with the last coordinate eliminated.
fn simplex_integral<F: Fn(&[f64]) -> Result<f64>>(f: &F, c: &mut Vec<f64>, k: usize, remaining: f64) -> Result<f64> {
    let r = c.len();
    if k == r - 1 {
        c[k] = remaining.max(0.0);
        return f(c);
    }
    let mut failure = None;
    let mut local = c.clone();
    let (val, _) = integrate(
        |x| {
            local[k] = x;
            match simplex_integral(f, &mut local, k + 1, remaining - x) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        remaining,
        OUTER_TOL,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

fn check_radius(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("radius must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `log Vol(B_T)`, stable for large `T`.
pub fn log_ball_volume(rs: &RootSystemData, t: f64) -> Result<f64> {
    check_radius(t)?;
    if t == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if rs.rank_r == 1 {
        let x = rs.delta * t;
        // (cosh x - 1)/delta = 2 sinh^2(x/2)/delta
        return Ok(std::f64::consts::LN_2 + 2.0 * log_sinh(0.5 * x) - rs.delta.ln());
    }
    let shift = rs.delta * t;
    let gens = ChamberCone::Full.generators(rs)?;
    let v = scaled_cone_integral(rs, &gens, t, 0.0, shift)?;
    Ok(v.ln() + shift)
}

pub fn ball_volume(rs: &RootSystemData, t: f64) -> Result<f64> {
    check_radius(t)?;
    if rs.rank_r == 1 {
        let x = rs.delta * t;
        let half = (0.5 * x).sinh();
        return Ok(2.0 * half * half / rs.delta);
    }
    Ok(log_ball_volume(rs, t)?.exp())
}

pub fn cone_volume(rs: &RootSystemData, t: f64, c_min: f64, cone: &ChamberCone) -> Result<f64> {
    check_radius(t)?;
    if !(c_min >= 0.0) {
        return Err(Error::domain(format!("wall margin must be non-negative, got {c_min}")));
    }
    let gens = cone.generators(rs)?;
    let coords = cone_coordinates(&rs.spec, &gens, &rs.barycenter)
        .ok_or_else(|| Error::domain("cone generators are linearly dependent"))?;
    if coords.iter().any(|c| *c <= 1e-12) {
        return Err(Error::domain("cone does not contain the barycenter direction in its interior"));
    }
    if rs.rank_r == 1 {
        // Margin C means alpha(t) = delta * |t| >= C.
        let lo = c_min / rs.delta;
        if lo >= t {
            return Ok(0.0);
        }
        return Ok(((rs.delta * t).cosh() - (rs.delta * lo).cosh()) / rs.delta);
    }
    let shift = rs.delta * t;
    Ok(scaled_cone_integral(rs, &gens, t, c_min, shift)? * shift.exp())
}

pub fn volume_ratio(rs: &RootSystemData, t: f64, eps: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps < t) {
        return Err(Error::domain(format!("need 0 <= eps < T, got eps={eps}, T={t}")));
    }
    if eps == 0.0 {
        return Ok(1.0);
    }
    Ok((log_ball_volume(rs, t - eps)? - log_ball_volume(rs, t)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_and_barycenter() {
        let cases = [(GroupSpec::sl(2), 1.0), (GroupSpec::product(&[2, 2]), 2f64.sqrt()), (GroupSpec::sl(3), 8f64.sqrt())];
        for (spec, delta) in cases {
            let rs = root_system(&spec);
            assert!((rs.delta - delta).abs() < 1e-14);
            assert!((rs.two_rho_at(&rs.barycenter) - rs.delta).abs() < 1e-12);
            assert!(crate::lie::chamber_margin(&spec, &rs.barycenter) > 0.0);
        }
        let rs = root_system(&GroupSpec::sl(3));
        let s = 0.5f64.sqrt();
        assert!(rs.barycenter.iter().zip([s, 0.0, -s]).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn log_sinh_is_continuous_at_the_switch() {
        for x in [19.999, 20.0, 20.001, 25.0, 40.0] {
            assert!((log_sinh(x) - f64::sinh(x).ln()).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn density_examples() {
        let rs = root_system(&GroupSpec::sl(2));
        assert!((density_xi(&rs, &[0.5, -0.5]).unwrap() - 1f64.sinh()).abs() < 1e-15);
        assert_eq!(density_xi(&rs, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(density_xi(&rs, &[-0.5, 0.5]).is_err());
        let rs = root_system(&GroupSpec::product(&[2, 2]));
        let v = density_xi(&rs, &[0.5, -0.5, 1.0, -1.0]).unwrap();
        assert!((v - 4.262291).abs() < 1e-6);
    }

    #[test]
    fn rank_one_closed_forms() {
        let rs = root_system(&GroupSpec::sl(2));
        assert!((ball_volume(&rs, 2.0).unwrap() - 2.76220).abs() < 1e-5);
        let c = cone_volume(&rs, 10.0, 1.0, &ChamberCone::Full).unwrap();
        assert!((c - (10f64.cosh() - 1f64.cosh())).abs() < 1e-8);
        assert!((volume_ratio(&rs, 20.0, 0.1).unwrap() - (-0.1f64).exp()).abs() < 1e-3);
        assert_eq!(volume_ratio(&rs, 20.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn product_matches_one_dimensional_reduction() {
        // Vol = int_0^T sinh(s1) (cosh(sqrt(T^2 - s1^2)) - 1) ds1 for SL(2) x SL(2).
        let rs = root_system(&GroupSpec::product(&[2, 2]));
        let t = 6.0;
        let (oracle, _) = integrate(
            |s| s.sinh() * ((t * t - s * s).max(0.0).sqrt().cosh() - 1.0),
            0.0,
            t,
            Tolerance::default(),
        )
        .unwrap();
        let v = ball_volume(&rs, t).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn full_cone_at_zero_margin_is_the_ball() {
        let rs = root_system(&GroupSpec::sl(3));
        let b = ball_volume(&rs, 5.0).unwrap();
        let c = cone_volume(&rs, 5.0, 0.0, &ChamberCone::Full).unwrap();
        assert!(((b - c) / b).abs() < 1e-9);
    }

    #[test]
    fn cone_must_contain_barycenter() {
        let rs = root_system(&GroupSpec::sl(3));
        let cone = ChamberCone::Simplicial(vec![vec![2.0, -1.0, -1.0], vec![2.0, -0.5, -1.5]]);
        assert!(cone_volume(&rs, 5.0, 0.0, &cone).is_err());
        let cone = ChamberCone::Simplicial(vec![vec![1.0, 0.1, -1.1], vec![1.1, -0.1, -1.0]]);
        assert!(cone_volume(&rs, 5.0, 0.0, &cone).unwrap() > 0.0);
    }
}
