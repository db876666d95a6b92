//! Iwasawa (KAN) decomposition through QR with a positive diagonal.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::GroupElement;

/// `g = k exp(a_log) n` with `k` orthogonal and `n` unit upper triangular.
#[derive(Clone, Debug)]
pub struct IwasawaTriple {
    pub k: GroupElement,
    pub a_log: Vec<f64>,
    pub n: GroupElement,
}

impl IwasawaTriple {
    pub fn reconstruct(&self) -> GroupElement {
        let a = GroupElement::exp_diag(self.k.spec(), &self.a_log).expect("trace-zero a_log");
        self.k.mul(&a).mul(&self.n)
    }
}

pub fn iwasawa_decompose(g: &GroupElement) -> Result<IwasawaTriple> {
    if g.blocks().iter().any(|b| b.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("group element has non-finite entries"));
    }
    let spec = g.spec().clone();
    let mut ks = Vec::new();
    let mut ns = Vec::new();
    let mut a_log = Vec::with_capacity(spec.ambient_dim());
    for b in g.blocks() {
        let n = b.nrows();
        let qr = b.clone().qr();
        let mut q = qr.q();
        let mut r = qr.r();
        for i in 0..n {
            if r[(i, i)] < 0.0 {
                q.column_mut(i).neg_mut();
                r.row_mut(i).neg_mut();
            }
        }
        let diag: Vec<f64> = (0..n).map(|i| r[(i, i)]).collect();
        if diag.iter().any(|d| *d <= 0.0) {
            return Err(Error::Numeric("singular block in Iwasawa decomposition".into()));
        }
        let mut unip = DMatrix::identity(n, n);
        for i in 0..n {
            for j in i + 1..n {
                unip[(i, j)] = r[(i, j)] / diag[i];
            }
        }
        let logs: Vec<f64> = diag.iter().map(|d| d.ln()).collect();
        let mean = logs.iter().sum::<f64>() / n as f64;
        a_log.extend(logs.iter().map(|l| l - mean));
        ks.push(q);
        ns.push(unip);
    }
    Ok(IwasawaTriple {
        k: GroupElement::from_blocks_unchecked(spec.clone(), ks),
        a_log,
        n: GroupElement::from_blocks_unchecked(spec, ns),
    })
}
