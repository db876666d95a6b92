use rayon::prelude::*;

use super::{LatticeKind, OrbitPoint, OrbitSet};
use crate::error::{Error, Result};

/// Counts pairs `(gamma1, gamma2)` with `hypot(d1, d2) < t` satisfying `pred`,
/// without materializing the pair list.
///
/// `factors` are rank-one orbits of the two factors, each enumerated to at least `t`.
pub fn stream_count_product<P>(factors: [&OrbitSet; 2], t: f64, pred: P) -> Result<u64>
where
    P: Fn(&OrbitPoint<'_>, &OrbitPoint<'_>) -> bool + Sync,
{
    for f in factors {
        if f.lattice.kind != LatticeKind::Psl2z {
            return Err(Error::invalid("factor orbits must be rank-one PSL(2,Z) orbits"));
        }
        if f.t < t {
            return Err(Error::MissingCache(format!("factor orbit enumerated to {} but {t} requested", f.t)));
        }
    }
    let [f1, f2] = factors;
    let d2 = f2.dists();
    let n1 = f1.count_below(t);
    Ok((0..n1)
        .into_par_iter()
        .map(|i| {
            let p = f1.point(i);
            let n2 = d2.partition_point(|d| p.dist.hypot(*d) < t);
            (0..n2).filter(|&j| pred(&p, &f2.point(j))).count() as u64
        })
        .sum())
}
