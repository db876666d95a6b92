//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 5_000;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 0.0, max_depth: 40 }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

#[derive(Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err).is_eq()
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integrates `f` over `[a, b]`; returns `(value, error_estimate)`.
///
/// Globally adaptive: the piece with the largest error estimate is bisected
/// until the summed error meets the tolerance. `max_depth` bounds the number
/// of bisections at `2^max_depth` and pieces narrower than `(b - a) 2^-max_depth`
/// are frozen.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!("non-finite integration bounds [{a}, {b}]")));
    }
    if b <= a {
        return Ok((0.0, 0.0));
    }
    let (val, err) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::from([Piece { lo: a, hi: b, val, err }]);
    let (mut total, mut total_err) = (val, err);
    let (mut frozen_val, mut frozen_err) = (0.0, 0.0);
    let min_width = (b - a) * 0.5f64.powi(tol.max_depth as i32);
    let budget = MAX_BISECTIONS.min(1usize << tol.max_depth.min(30));
    for _ in 0..budget {
        if !total.is_finite() {
            return Err(Error::Numeric(format!("non-finite integrand on [{a}, {b}]")));
        }
        if total_err <= (tol.rel * total.abs()).max(tol.abs) || total_err <= 1e-15 * total.abs() {
            return Ok((total, total_err));
        }
        let Some(p) = heap.pop() else { break };
        if p.hi - p.lo <= min_width {
            frozen_val += p.val;
            frozen_err += p.err;
            continue;
        }
        let mid = 0.5 * (p.lo + p.hi);
        let (l, le) = gk15(&mut f, p.lo, mid);
        let (r, re) = gk15(&mut f, mid, p.hi);
        total += l + r - p.val;
        total_err += le + re - p.err;
        heap.push(Piece { lo: p.lo, hi: mid, val: l, err: le });
        heap.push(Piece { lo: mid, hi: p.hi, val: r, err: re });
    }
    // Recompute to shed accumulated rounding in the running sums.
    total = frozen_val + heap.iter().map(|p| p.val).sum::<f64>();
    total_err = frozen_err + heap.iter().map(|p| p.err).sum::<f64>();
    if total_err <= (tol.rel * total.abs()).max(tol.abs) || total_err <= 1e-15 * total.abs() {
        return Ok((total, total_err));
    }
    Err(Error::Numeric(format!(
        "quadrature did not converge on [{a}, {b}]: error {total_err:.3e}, value {total:.3e}"
    )))
}
