//! Brute-force sweep used to certify the fast enumerator.

use super::{factor_distance, is_psl_canonical, LatticeKind};
use crate::lie::sl2;

/// Every canonical `gamma` with entries bounded by `ceil(sqrt(2 cosh t))`, `det = 1`,
/// lattice membership and `d(K, K gamma) < t`, sorted lexicographically.
pub fn naive_sweep(kind: LatticeKind, t: f64) -> Vec<[i64; 4]> {
    let n = (2.0 * t.cosh()).sqrt().ceil() as i64;
    let id = sl2::from_int(&[1, 0, 0, 1]);
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                for d in -n..=n {
                    let m = [a, b, c, d];
                    if a * d - b * c == 1 && is_psl_canonical(&m) && kind.contains(&m) && factor_distance(&id, &m) < t {
                        out.push(m);
                    }
                }
            }
        }
    }
    out.sort();
    out
}
