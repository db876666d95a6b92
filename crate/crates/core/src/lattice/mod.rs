//! Exhaustive enumeration of lattice orbits `{K g gamma : d(K, K g gamma) < T}`.
//!
//! Orbits are stored column-wise (entries, distances, Cartan angles) and sorted
//! by distance, so a cache for radius `T` serves every `T' <= T` as a prefix.

mod cache;
mod enumerate;
pub mod oracle;
mod stream;

pub use cache::{load_cache, save_cache, CACHE_MAGIC, CACHE_VERSION};
pub use enumerate::{enumerate, enumerate_with_cap};
pub use stream::stream_count_product;

use crate::error::{Error, Result};
use crate::lie::sl2::{self, Mat2};
use crate::lie::{GroupElement, GroupSpec};

pub const RANK_ONE_CAP: f64 = 14.0;
pub const PRODUCT_CAP: f64 = 9.0;
pub const MAX_POINTS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Psl2z,
    Gamma0(u32),
    Gamma(u32),
    ProductPsl2z,
}

impl LatticeKind {
    pub fn code(&self) -> (u8, u32) {
        match *self {
            LatticeKind::Psl2z => (0, 1),
            LatticeKind::Gamma0(n) => (1, n),
            LatticeKind::Gamma(n) => (2, n),
            LatticeKind::ProductPsl2z => (3, 1),
        }
    }

    pub fn from_code(kind: u8, level: u32) -> Option<Self> {
        match kind {
            0 => Some(LatticeKind::Psl2z),
            1 => Some(LatticeKind::Gamma0(level)),
            2 => Some(LatticeKind::Gamma(level)),
            3 => Some(LatticeKind::ProductPsl2z),
            _ => None,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, LatticeKind::ProductPsl2z)
    }

    /// Matrix entries per element.
    pub fn stride(&self) -> usize {
        if self.is_product() {
            8
        } else {
            4
        }
    }

    /// Cartan angles per element (`k1`, `k2` per factor).
    pub fn angle_stride(&self) -> usize {
        if self.is_product() {
            4
        } else {
            2
        }
    }

    fn contains(&self, m: &[i64; 4]) -> bool {
        match *self {
            LatticeKind::Psl2z | LatticeKind::ProductPsl2z => true,
            LatticeKind::Gamma0(n) => m[2].rem_euclid(n as i64) == 0,
            LatticeKind::Gamma(n) => {
                let n = n as i64;
                let r = |x: i64| x.rem_euclid(n);
                let off = r(m[1]) == 0 && r(m[2]) == 0;
                off && ((r(m[0]) == r(1) && r(m[3]) == r(1)) || (r(m[0]) == r(-1) && r(m[3]) == r(-1)))
            }
        }
    }
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatticeKind::Psl2z => write!(f, "PSL2Z"),
            LatticeKind::Gamma0(n) => write!(f, "Gamma0({n})"),
            LatticeKind::Gamma(n) => write!(f, "Gamma({n})"),
            LatticeKind::ProductPsl2z => write!(f, "PSL2Z^2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    /// Basepoint shift `g`; the orbit is `{K g gamma}`.
    pub conjugator: GroupElement,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, conjugator: GroupElement) -> Result<Self> {
        match kind {
            LatticeKind::Gamma0(n) | LatticeKind::Gamma(n) if n == 0 => {
                return Err(Error::invalid("lattice level must be >= 1"));
            }
            _ => {}
        }
        let want = if kind.is_product() { GroupSpec::product(&[2, 2]) } else { GroupSpec::sl(2) };
        if conjugator.spec() != &want {
            return Err(Error::invalid(format!("conjugator must live in {}", if kind.is_product() { "SL(2)^2" } else { "SL(2)" })));
        }
        Ok(LatticeSpec { kind, conjugator })
    }

    pub fn standard(kind: LatticeKind) -> Result<Self> {
        let spec = if kind.is_product() { GroupSpec::product(&[2, 2]) } else { GroupSpec::sl(2) };
        LatticeSpec::new(kind, GroupElement::identity(&spec))
    }

    pub fn psl2z() -> Self {
        LatticeSpec::standard(LatticeKind::Psl2z).expect("identity conjugator")
    }

    pub fn product() -> Self {
        LatticeSpec::standard(LatticeKind::ProductPsl2z).expect("identity conjugator")
    }

    /// Conjugator block `i` as a row-major 2x2 matrix.
    pub fn conjugator_block(&self, i: usize) -> Mat2 {
        let b = self.conjugator.block(i);
        [b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]]
    }

    /// Rank-one lattice for factor `i` of a product lattice.
    pub fn factor(&self, i: usize) -> LatticeSpec {
        let [a, b, c, d] = self.conjugator_block(i);
        LatticeSpec::new(LatticeKind::Psl2z, GroupElement::sl2(a, b, c, d).expect("valid block"))
            .expect("rank-one factor")
    }

    pub fn cap(&self) -> f64 {
        if self.kind.is_product() {
            PRODUCT_CAP
        } else {
            RANK_ONE_CAP
        }
    }
}

/// Volume of `Gamma \ G` for the Haar measure whose ball volume is `cosh T - 1` per factor.
pub fn covolume(kind: LatticeKind) -> Result<f64> {
    let base = 1.0 / 6.0;
    Ok(match kind {
        LatticeKind::Psl2z => base,
        LatticeKind::ProductPsl2z => base * base,
        LatticeKind::Gamma0(n) => {
            if n == 0 {
                return Err(Error::invalid("level must be >= 1"));
            }
            let idx = prime_factors(n).iter().fold(n as f64, |acc, &p| acc * (1.0 + 1.0 / p as f64));
            idx * base
        }
        LatticeKind::Gamma(n) => {
            if n == 0 {
                return Err(Error::invalid("level must be >= 1"));
            }
            let idx = match n {
                1 => 1.0,
                2 => 6.0,
                _ => {
                    let nf = n as f64;
                    prime_factors(n).iter().fold(nf.powi(3) / 2.0, |acc, &p| acc * (1.0 - 1.0 / (p as f64 * p as f64)))
                }
            };
            idx * base
        }
    })
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Normalizes an integer matrix so its first nonzero entry (reading order) is positive.
pub fn psl_canonical(m: [i64; 4]) -> [i64; 4] {
    match m.iter().find(|v| **v != 0) {
        Some(v) if *v < 0 => m.map(|x| -x),
        _ => m,
    }
}

pub fn is_psl_canonical(m: &[i64; 4]) -> bool {
    m.iter().find(|v| **v != 0).is_some_and(|v| *v > 0)
}

/// A borrowed orbit element.
#[derive(Clone, Copy, Debug)]
pub struct OrbitPoint<'a> {
    pub gamma: &'a [i64],
    pub dist: f64,
    /// `(k1, k2)` doubled angles, per factor.
    pub angles: &'a [f64],
}

impl OrbitPoint<'_> {
    pub fn factor_gamma(&self, i: usize) -> [i64; 4] {
        let g = &self.gamma[4 * i..4 * i + 4];
        [g[0], g[1], g[2], g[3]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSet {
    pub lattice: LatticeSpec,
    pub t: f64,
    pub covolume: f64,
    entries: Vec<i64>,
    dists: Vec<f64>,
    angles: Vec<f64>,
}

impl OrbitSet {
    pub(crate) fn from_parts(lattice: LatticeSpec, t: f64, entries: Vec<i64>, dists: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        let covolume = covolume(lattice.kind)?;
        let k = lattice.kind;
        debug_assert_eq!(entries.len(), dists.len() * k.stride());
        debug_assert_eq!(angles.len(), dists.len() * k.angle_stride());
        Ok(OrbitSet { lattice, t, covolume, entries, dists, angles })
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    pub fn point(&self, i: usize) -> OrbitPoint<'_> {
        let s = self.lattice.kind.stride();
        let a = self.lattice.kind.angle_stride();
        OrbitPoint { gamma: &self.entries[s * i..s * (i + 1)], dist: self.dists[i], angles: &self.angles[a * i..a * (i + 1)] }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = OrbitPoint<'_>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn dists(&self) -> &[f64] {
        &self.dists
    }

    /// Number of points with `dist < t`.
    pub fn count_below(&self, t: f64) -> usize {
        self.dists.partition_point(|d| *d < t)
    }

    /// Prefix view for a smaller radius, without re-enumeration.
    pub fn restrict(&self, t: f64) -> Result<OrbitSet> {
        if t > self.t {
            return Err(Error::domain(format!("radius {t} exceeds the enumerated radius {}", self.t)));
        }
        let n = self.count_below(t);
        let k = self.lattice.kind;
        Ok(OrbitSet {
            lattice: self.lattice.clone(),
            t,
            covolume: self.covolume,
            entries: self.entries[..n * k.stride()].to_vec(),
            dists: self.dists[..n].to_vec(),
            angles: self.angles[..n * k.angle_stride()].to_vec(),
        })
    }

    /// Recomputes the distance of point `i` from its integer entries.
    pub fn recompute_dist(&self, i: usize) -> f64 {
        let p = self.point(i);
        if self.lattice.kind.is_product() {
            let d1 = factor_distance(&self.lattice.conjugator_block(0), &p.factor_gamma(0));
            let d2 = factor_distance(&self.lattice.conjugator_block(1), &p.factor_gamma(1));
            d1.hypot(d2)
        } else {
            factor_distance(&self.lattice.conjugator_block(0), &p.factor_gamma(0))
        }
    }
}

/// `Gamma ∩ K_y` for the point `y = K g`: every canonical `gamma` with `g gamma g^-1` in `K`.
pub fn stabilizer(kind: LatticeKind, g: &Mat2) -> Vec<[i64; 4]> {
    // g gamma g^-1 in K bounds |gamma|_op by |g|_op |g^-1|_op = e^{2t}.
    let t = sl2::kak(g).t;
    let n = ((2.0 * t).exp() * std::f64::consts::SQRT_2).ceil() as i64;
    let ginv = sl2::inverse(g);
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                for d in -n..=n {
                    let m = [a, b, c, d];
                    if a * d - b * c != 1 || !is_psl_canonical(&m) || !kind.contains(&m) {
                        continue;
                    }
                    let conj = sl2::mul(&sl2::mul(g, &sl2::from_int(&m)), &ginv);
                    if sl2::distance(&conj) < 1e-9 {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

pub(crate) fn factor_distance(g: &Mat2, gamma: &[i64; 4]) -> f64 {
    sl2::distance(&sl2::mul(g, &sl2::from_int(gamma)))
}
