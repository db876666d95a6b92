//! Cartan (KAK) decomposition through the singular value decomposition.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::svd;
use crate::lie::chamber::{chamber_margin, WALL_TOLERANCE};
use crate::lie::{GroupElement, GroupSpec};

/// `g = k1 exp(a_log) k2` with `a_log` in the closed positive chamber.
#[derive(Clone, Debug)]
pub struct CartanTriple {
    pub k1: GroupElement,
    pub a_log: Vec<f64>,
    pub k2: GroupElement,
    pub mu_norm: f64,
    /// False when `a_log` is within [`WALL_TOLERANCE`] of a wall; the `M`
    /// representative is then whatever the SVD produced.
    pub regular: bool,
}

impl CartanTriple {
    pub fn reconstruct(&self) -> GroupElement {
        let a = GroupElement::exp_diag(self.k1.spec(), &self.a_log).expect("trace-zero a_log");
        self.k1.mul(&a).mul(&self.k2)
    }
}

struct BlockSvd {
    u: DMatrix<f64>,
    logs: Vec<f64>,
    v_t: DMatrix<f64>,
}

fn check_finite(g: &GroupElement) -> Result<()> {
    if g.blocks().iter().any(|b| b.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("group element has non-finite entries"));
    }
    Ok(())
}

fn block_svd(m: &DMatrix<f64>) -> Result<BlockSvd> {
    let n = m.nrows();
    let svd::Svd { u, sigma: sv, v_t } = svd::svd(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let mut su = DMatrix::zeros(n, n);
    let mut sv_t = DMatrix::zeros(n, n);
    let mut logs = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv_t.set_row(dst, &v_t.row(src));
        if sv[src] <= 0.0 {
            return Err(Error::Numeric("zero singular value in unimodular block".into()));
        }
        logs.push(sv[src].ln());
    }
    // Both orthogonal factors must land in SO(n); flipping the last column of U
    // together with the last row of V^T leaves the product unchanged.
    if su.determinant() < 0.0 {
        let last = n - 1;
        su.column_mut(last).neg_mut();
        sv_t.row_mut(last).neg_mut();
    }
    if sv_t.determinant() < 0.0 {
        return Err(Error::Numeric("orthogonal factors have inconsistent orientation".into()));
    }
    let mean = logs.iter().sum::<f64>() / n as f64;
    logs.iter_mut().for_each(|l| *l -= mean);
    Ok(BlockSvd { u: su, logs, v_t: sv_t })
}

/// Cartan decomposition with the canonical `M` representative when `a` is regular.
pub fn cartan_decompose(g: &GroupElement) -> Result<CartanTriple> {
    check_finite(g)?;
    let spec = g.spec().clone();
    let mut k1 = Vec::with_capacity(g.blocks().len());
    let mut k2 = Vec::with_capacity(g.blocks().len());
    let mut a_log = Vec::with_capacity(spec.ambient_dim());
    for b in g.blocks() {
        let s = block_svd(b)?;
        k1.push(s.u);
        k2.push(s.v_t);
        a_log.extend(s.logs);
    }
    let k1 = GroupElement::from_blocks_unchecked(spec.clone(), k1);
    let k2 = GroupElement::from_blocks_unchecked(spec, k2);
    Ok(canonical_m_reduce(k1, a_log, k2))
}

/// `d(K, Kg) = |mu(g)|` without computing singular vectors.
pub fn distance_to_origin(g: &GroupElement) -> Result<f64> {
    check_finite(g)?;
    let spec = g.spec();
    let mut acc = 0.0;
    for (b, f) in g.blocks().iter().zip(spec.factors()) {
        if let Some(m) = as_mat2(b) {
            let d = crate::lie::sl2::distance(&m);
            // for SL(2), |a_log|^2 = 2 t^2 and the distance at scale sqrt(2) is 2t.
            let t = 0.5 * d;
            acc += f.metric_scale * f.metric_scale * 2.0 * t * t;
        } else {
            let logs: Vec<f64> = svd::svd(b)?.sigma.iter().map(|s| s.ln()).collect();
            let mean = logs.iter().sum::<f64>() / logs.len() as f64;
            acc += f.metric_scale
                * f.metric_scale
                * logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>();
        }
    }
    Ok(acc.sqrt())
}

/// `d(Kg, Kh) = d(K, K h g^-1)` for the right action of `G` on `K\G`.
pub fn distance(g: &GroupElement, h: &GroupElement) -> Result<f64> {
    distance_to_origin(&h.mul(&g.inverse()))
}

fn as_mat2(b: &DMatrix<f64>) -> Option<[f64; 4]> {
    (b.nrows() == 2).then(|| [b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]])
}

/// Deterministic representative of the `M`-orbit `(k1 m, a, m^-1 k2)`.
///
/// For regular `a`, the sign matrix `m` is chosen so that in every block the first
/// entry of maximal absolute value in rows `0..n-1` of `k2` is positive; the last
/// row's sign is then fixed by `det m = 1`. Singular `a` is returned untouched
/// with `regular = false`.
pub fn canonical_m_reduce(k1: GroupElement, a_log: Vec<f64>, k2: GroupElement) -> CartanTriple {
    let spec: GroupSpec = k1.spec().clone();
    let mu_norm = spec.norm(&a_log);
    let regular = chamber_margin(&spec, &a_log) > WALL_TOLERANCE;
    if !regular {
        return CartanTriple { k1, a_log, k2, mu_norm, regular };
    }
    let mut b1: Vec<DMatrix<f64>> = k1.blocks().to_vec();
    let mut b2: Vec<DMatrix<f64>> = k2.blocks().to_vec();
    for (u, v) in b1.iter_mut().zip(b2.iter_mut()) {
        let n = v.nrows();
        let mut signs = vec![1.0; n];
        for (i, sign) in signs.iter_mut().enumerate().take(n - 1) {
            *sign = leading_sign(v.row(i).iter().copied());
        }
        signs[n - 1] = signs[..n - 1].iter().product();
        for (i, &s) in signs.iter().enumerate() {
            if s < 0.0 {
                u.column_mut(i).neg_mut();
                v.row_mut(i).neg_mut();
            }
        }
    }
    CartanTriple {
        k1: GroupElement::from_blocks_unchecked(spec.clone(), b1),
        a_log,
        k2: GroupElement::from_blocks_unchecked(spec, b2),
        mu_norm,
        regular,
    }
}

/// Sign of the first entry whose magnitude is maximal (up to rounding).
fn leading_sign(row: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = row.clone().fold(0.0, |m: f64, v| m.max(v.abs()));
    let first = row.into_iter().find(|v| v.abs() >= max - 1e-12 * max.max(1.0)).unwrap_or(1.0);
    if first < 0.0 {
        -1.0
    } else {
        1.0
    }
}
