use rayon::prelude::*;

use super::{factor_distance, is_psl_canonical, LatticeKind, LatticeSpec, OrbitSet, MAX_POINTS};
use crate::error::{Error, Result};
use crate::lie::sl2::{self, Mat2};

/// Largest admissible squared Frobenius bound; keeps every entry below 1e6.
const MAX_NORM_BOUND: f64 = 1e12;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Row {
    pub m: [i64; 4],
    pub dist: f64,
    pub k1: f64,
    pub k2: f64,
}

pub fn enumerate(lat: &LatticeSpec, t: f64) -> Result<OrbitSet> {
    enumerate_with_cap(lat, t, lat.cap())
}

pub fn enumerate_with_cap(lat: &LatticeSpec, t: f64, cap: f64) -> Result<OrbitSet> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("radius must be finite and non-negative, got {t}")));
    }
    if t > cap {
        return Err(Error::Resource(format!("radius {t} exceeds the enumeration cap {cap}")));
    }
    if lat.kind.is_product() {
        enumerate_product(lat, t)
    } else {
        let rows = enumerate_factor(lat.kind, &lat.conjugator_block(0), t)?;
        let mut entries = Vec::with_capacity(rows.len() * 4);
        let mut dists = Vec::with_capacity(rows.len());
        let mut angles = Vec::with_capacity(rows.len() * 2);
        for r in &rows {
            entries.extend_from_slice(&r.m);
            dists.push(r.dist);
            angles.extend_from_slice(&[r.k1, r.k2]);
        }
        OrbitSet::from_parts(lat.clone(), t, entries, dists, angles)
    }
}

/// `(g, u, v)` with `u a + v b = g = gcd(a, b) >= 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// All canonical `gamma` in the rank-one lattice with `d(K, K g gamma) < t`, sorted.
pub(crate) fn enumerate_factor(kind: LatticeKind, g: &Mat2, t: f64) -> Result<Vec<Row>> {
    if t == 0.0 {
        return Ok(Vec::new());
    }
    // |gamma|_F <= |g^-1|_op |g gamma|_F and |g gamma|_F^2 < 2 cosh t.
    let op = sl2::kak(&sl2::inverse(g)).t.exp();
    let bound = op * op * 2.0 * t.cosh() * (1.0 + 1e-12);
    if bound > MAX_NORM_BOUND {
        return Err(Error::Resource(format!("norm bound {bound:.3e} overflows the integer sweep")));
    }
    let side = bound.sqrt().floor() as i64;
    let mut rows: Vec<Row> = (-side..=side)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut out = Vec::new();
            let rem = bound - (c * c) as f64;
            let dmax = rem.max(0.0).sqrt().floor() as i64;
            for d in -dmax..=dmax {
                let w2 = c * c + d * d;
                if w2 == 0 || (w2 as f64) >= bound {
                    continue;
                }
                let (gcd, u, v) = ext_gcd(d, c);
                if gcd != 1 {
                    continue;
                }
                // u d + v c = 1, so (a, b) = (u, -v) solves a d - b c = 1.
                let (a0, b0) = (u, -v);
                let r = bound - w2 as f64;
                let wf = w2 as f64;
                let kstar = -((a0 * c + b0 * d) as f64) / wf;
                let h2 = (r - 1.0 / wf) / wf;
                if h2 < 0.0 {
                    continue;
                }
                let h = h2.sqrt();
                let klo = (kstar - h).floor() as i64 - 1;
                let khi = (kstar + h).ceil() as i64 + 1;
                for k in klo..=khi {
                    let a = a0 + k * c;
                    let b = b0 + k * d;
                    if ((a * a + b * b + w2) as f64) >= bound {
                        continue;
                    }
                    let m = [a, b, c, d];
                    if !is_psl_canonical(&m) || !kind.contains(&m) {
                        continue;
                    }
                    let gm = sl2::mul(g, &sl2::from_int(&m));
                    let dist = sl2::distance(&gm);
                    if dist < t {
                        let kak = sl2::kak(&gm);
                        out.push(Row { m, dist, k1: kak.k1_angle(), k2: kak.k2_angle() });
                    }
                }
            }
            out
        })
        .collect();
    if rows.len() > MAX_POINTS {
        return Err(Error::Resource(format!("{} points exceed the limit {MAX_POINTS}", rows.len())));
    }
    rows.par_sort_unstable_by(|x, y| x.dist.total_cmp(&y.dist).then(x.m.cmp(&y.m)));
    debug_assert!(rows.iter().all(|r| (factor_distance(g, &r.m) - r.dist).abs() == 0.0));
    Ok(rows)
}

fn enumerate_product(lat: &LatticeSpec, t: f64) -> Result<OrbitSet> {
    let f1 = enumerate_factor(LatticeKind::Psl2z, &lat.conjugator_block(0), t)?;
    let f2 = enumerate_factor(LatticeKind::Psl2z, &lat.conjugator_block(1), t)?;
    let d2: Vec<f64> = f2.iter().map(|r| r.dist).collect();
    let prefix = |d1: f64| d2.partition_point(|d| d1.hypot(*d) < t);
    let total: usize = f1.iter().map(|r| prefix(r.dist)).sum();
    if total > MAX_POINTS {
        return Err(Error::Resource(format!("{total} product points exceed the limit {MAX_POINTS}")));
    }
    let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(total);
    for (i, r) in f1.iter().enumerate() {
        for j in 0..prefix(r.dist) {
            pairs.push((r.dist.hypot(d2[j]), i as u32, j as u32));
        }
    }
    pairs.par_sort_unstable_by(|x, y| {
        x.0.total_cmp(&y.0).then_with(|| f1[x.1 as usize].m.cmp(&f1[y.1 as usize].m)).then_with(|| f2[x.2 as usize].m.cmp(&f2[y.2 as usize].m))
    });
    let mut entries = Vec::with_capacity(total * 8);
    let mut dists = Vec::with_capacity(total);
    let mut angles = Vec::with_capacity(total * 4);
    for (d, i, j) in pairs {
        let (a, b) = (&f1[i as usize], &f2[j as usize]);
        entries.extend_from_slice(&a.m);
        entries.extend_from_slice(&b.m);
        dists.push(d);
        angles.extend_from_slice(&[a.k1, a.k2, b.k1, b.k2]);
    }
    OrbitSet::from_parts(lat.clone(), t, entries, dists, angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::GroupElement;

    #[test]
    fn ext_gcd_identity() {
        for (a, b) in [(3, 5), (-4, 7), (0, 1), (1, 0), (-1, 0), (12, -18)] {
            let (g, u, v) = ext_gcd(a, b);
            assert_eq!(u * a + v * b, g);
            assert!(g >= 0);
        }
    }

    #[test]
    fn small_radius_is_the_stabilizer() {
        let o = enumerate(&LatticeSpec::psl2z(), 0.5).unwrap();
        let mut gammas: Vec<_> = o.iter().map(|p| p.factor_gamma(0)).collect();
        gammas.sort();
        assert_eq!(gammas, vec![[0, 1, -1, 0], [1, 0, 0, 1]]);
        assert!(o.iter().all(|p| p.dist.abs() < 1e-15));
    }

    #[test]
    fn zero_radius_is_empty() {
        assert!(enumerate(&LatticeSpec::psl2z(), 0.0).unwrap().is_empty());
    }

    #[test]
    fn over_cap_is_a_resource_error() {
        assert!(matches!(enumerate(&LatticeSpec::psl2z(), 14.5), Err(Error::Resource(_))));
    }

    #[test]
    fn inverse_closed() {
        let o = enumerate(&LatticeSpec::psl2z(), 6.0).unwrap();
        let set: std::collections::HashSet<[i64; 4]> = o.iter().map(|p| p.factor_gamma(0)).collect();
        for m in &set {
            let inv = super::super::psl_canonical([m[3], -m[1], -m[2], m[0]]);
            assert!(set.contains(&inv));
        }
    }

    #[test]
    fn conjugated_distances_are_exact() {
        let g = GroupElement::sl2(2.0, 0.0, 0.0, 0.5).unwrap();
        let lat = LatticeSpec::new(LatticeKind::Psl2z, g).unwrap();
        let o = enumerate(&lat, 6.0).unwrap();
        for i in 0..o.len() {
            assert!((o.recompute_dist(i) - o.dists()[i]).abs() < 1e-12);
        }
        assert!(o.dists().windows(2).all(|w| w[0] <= w[1]));
    }
}
