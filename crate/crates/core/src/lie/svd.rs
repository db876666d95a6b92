//! Singular value decomposition with high relative accuracy for graded
//! matrices: column-pivoted QR followed by one-sided Jacobi on `R^T`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

/// One-sided Jacobi: `x = u diag(sigma) v^T` with `u`, `v` orthogonal.
fn jacobi(mut x: DMatrix<f64>) -> Result<Svd> {
    let n = x.ncols();
    let mut v = DMatrix::<f64>::identity(n, n);
    // A threshold of exactly eps can be unreachable under rounding.
    let tol = 4.0 * n as f64 * f64::EPSILON;
    let mut converged = false;
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = x.column(p).norm_squared();
                let beta = x.column(q).norm_squared();
                let gamma = x.column(p).dot(&x.column(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut x, &mut v] {
                    for i in 0..m.nrows() {
                        let (a, b) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * a - s * b;
                        m[(i, q)] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric("Jacobi SVD did not converge".into()));
    }
    let sigma: Vec<f64> = (0..n).map(|j| x.column(j).norm()).collect();
    if sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Numeric("zero singular value in unimodular block".into()));
    }
    for (j, s) in sigma.iter().enumerate() {
        x.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(Svd { u: x, sigma, v_t: v.transpose() })
}

/// `m = u diag(sigma) v_t`, singular values in no particular order.
pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    let n = m.nrows();
    let qr = m.clone().col_piv_qr();
    let mut p = DMatrix::<f64>::identity(n, n);
    qr.p().permute_columns(&mut p);
    let (q, r) = (qr.q(), qr.r());
    // m p = q r and r^T = w sigma z^T, so m = (q z) sigma (p w)^T.
    let inner = jacobi(r.transpose())?;
    Ok(Svd { u: q * inner.v_t.transpose(), sigma: inner.sigma, v_t: (p * inner.u).transpose() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_general_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 0.3, 4.0, 1.0, -2.0, 0.1, 3.0]);
        let s = svd(&m).unwrap();
        let back = &s.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.sigma.clone())) * &s.v_t;
        assert!((back - &m).abs().max() < 1e-13);
        assert!((&s.u.transpose() * &s.u - DMatrix::identity(3, 3)).abs().max() < 1e-14);
        assert!((&s.v_t * s.v_t.transpose() - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn graded_matrix_keeps_small_singular_values() {
        // diag(1e8, 1, 1e-8) times a well-conditioned matrix: singular values
        // stay within a small relative error of the diagonal.
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.01, 0.0, 0.0, 1.0, 0.01, 0.01, 0.0, 1.0]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1e8, 1.0, 1e-8]));
        let s = svd(&(&d * &b)).unwrap();
        let mut sig = s.sigma.clone();
        sig.sort_by(f64::total_cmp);
        assert!((sig[0] / 1e-8 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn converges_on_matrix_that_stalled_at_eps_threshold() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                -0.18825342908483103,
                -1.3254006814525883,
                0.9060941744542806,
                0.7813874652706249,
                -1.6807673008699922,
                0.5947928719758554,
                -0.5073871515475747,
                2.0821055978483805,
                -0.24744888064098552,
            ],
        );
        let s = svd(&m).unwrap();
        let back = &s.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.sigma.clone())) * &s.v_t;
        assert!((back - &m).abs().max() < 1e-13);
    }
}
