//! Weyl chamber geometry for products of SL(n): roots, margins and coweights.

use crate::lie::GroupSpec;

/// A root `t -> t[i] - t[j]` in the concatenated diagonal coordinates (`i < j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Root {
    pub i: usize,
    pub j: usize,
    pub multiplicity: u32,
}

impl Root {
    pub fn eval(&self, t: &[f64]) -> f64 {
        t[self.i] - t[self.j]
    }
}

/// Simple roots `t_k - t_{k+1}` of every block.
pub fn simple_roots(spec: &GroupSpec) -> Vec<Root> {
    (0..spec.factors().len())
        .flat_map(|b| {
            let r = spec.block_range(b);
            (r.start..r.end - 1).map(|k| Root { i: k, j: k + 1, multiplicity: 1 })
        })
        .collect()
}

/// All positive roots `t_i - t_j`, `i < j` within a block. Split real forms have
/// one-dimensional root spaces.
pub fn positive_roots(spec: &GroupSpec) -> Vec<Root> {
    (0..spec.factors().len())
        .flat_map(|b| {
            let r = spec.block_range(b);
            let (lo, hi) = (r.start, r.end);
            (lo..hi).flat_map(move |i| (i + 1..hi).map(move |j| Root { i, j, multiplicity: 1 }))
        })
        .collect()
}

/// Minimum of the simple roots on `a_log`. Positive exactly on the open chamber;
/// membership in `A+(C)` is `margin >= C`.
pub fn chamber_margin(spec: &GroupSpec, a_log: &[f64]) -> f64 {
    simple_roots(spec).iter().map(|r| r.eval(a_log)).fold(f64::INFINITY, f64::min)
}

/// Chamber margins below this are treated as walls.
pub const WALL_TOLERANCE: f64 = 1e-8;

pub fn is_regular(spec: &GroupSpec, a_log: &[f64]) -> bool {
    chamber_margin(spec, a_log) > WALL_TOLERANCE
}

/// Fundamental coweights: `w_k` with `alpha_j(w_k) = delta_jk` for the simple roots,
/// trace zero in every block. They generate the closed chamber as a simplicial cone.
pub fn fundamental_coweights(spec: &GroupSpec) -> Vec<Vec<f64>> {
    let dim = spec.ambient_dim();
    let mut out = Vec::with_capacity(spec.rank());
    for b in 0..spec.factors().len() {
        let r = spec.block_range(b);
        let n = r.len();
        for k in 1..n {
            let mut w = vec![0.0; dim];
            for (idx, slot) in w[r.clone()].iter_mut().enumerate() {
                *slot = if idx < k {
                    (n - k) as f64 / n as f64
                } else {
                    -(k as f64) / n as f64
                };
            }
            out.push(w);
        }
    }
    out
}

/// Sorts each block of an a-vector descending, i.e. moves it into the closed
/// chamber with the Weyl group.
pub fn to_chamber(spec: &GroupSpec, a_log: &[f64]) -> Vec<f64> {
    let mut out = a_log.to_vec();
    for b in 0..spec.factors().len() {
        out[spec.block_range(b)].sort_by(|x, y| y.total_cmp(x));
    }
    out
}
