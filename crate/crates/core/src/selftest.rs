//! Seeded invariant suites shared by the test targets and `orbitlab selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lie::compact::{haar_k, random_group_element, weyl_element};
use crate::lie::{cartan_decompose, distance, distance_to_origin, GroupElement, GroupSpec};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed excess over the tolerance-free inequality (or error).
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    fn new(name: &str, samples: usize, tolerance: f64) -> Self {
        Self { name: name.into(), samples, violations: 0, worst: 0.0, tolerance }
    }

    fn record(&mut self, excess: f64) {
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
        }
        if !(excess <= self.tolerance) {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Random strictly regular chamber vector, block entries sorted descending.
pub fn random_chamber_vector<R: Rng + ?Sized>(spec: &GroupSpec, scale: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.ambient_dim());
    for f in spec.factors() {
        let mut v: Vec<f64> = (0..f.n).map(|_| rng.random_range(-scale..scale)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let mean = v.iter().sum::<f64>() / f.n as f64;
        out.extend(v.iter().map(|x| x - mean));
    }
    out
}

pub fn cartan_round_trip(spec: &GroupSpec, samples: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("cartan_round_trip", samples, 1e-8);
    for _ in 0..samples {
        let g = random_group_element(spec, &mut rng);
        match cartan_decompose(&g) {
            Ok(t) => rep.record(t.reconstruct().max_entry_diff(&g)),
            Err(_) => rep.record(f64::INFINITY),
        }
    }
    rep
}

pub fn distance_symmetry(spec: &GroupSpec, samples: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("distance_symmetry", samples, 1e-9);
    for _ in 0..samples {
        let g = random_group_element(spec, &mut rng);
        let d = distance_to_origin(&g).unwrap_or(f64::NAN);
        let di = distance_to_origin(&g.inverse()).unwrap_or(f64::NAN);
        rep.record((d - di).abs());
    }
    rep
}

/// `d(Ka1, Ka2) <= d(Ka1 k, Ka2)` for chamber elements and arbitrary `k`.
pub fn helgason_inequality(spec: &GroupSpec, samples: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("diagonal_distance_minimal", samples, 1e-9);
    for _ in 0..samples {
        let a1 = GroupElement::exp_diag(spec, &random_chamber_vector(spec, 3.0, &mut rng)).unwrap();
        let a2 = GroupElement::exp_diag(spec, &random_chamber_vector(spec, 3.0, &mut rng)).unwrap();
        let k = haar_k(spec, &mut rng);
        let lhs = distance(&a1, &a2).unwrap_or(f64::NAN);
        let rhs = distance(&a1.mul(&k), &a2).unwrap_or(f64::NAN);
        rep.record(lhs - rhs);
    }
    rep
}

/// `<H1, H2> >= <Ad(k) H1, H2>` for chamber vectors `H1, H2`.
pub fn adjoint_inner_product(spec: &GroupSpec, samples: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("adjoint_inner_product", samples, 1e-9);
    for _ in 0..samples {
        let h1 = random_chamber_vector(spec, 3.0, &mut rng);
        let h2 = random_chamber_vector(spec, 3.0, &mut rng);
        let k = haar_k(spec, &mut rng);
        let direct = spec.inner(&h1, &h2);
        let mut rotated = 0.0;
        for (b, f) in spec.factors().iter().enumerate() {
            let r = spec.block_range(b);
            let kb = k.block(b);
            let mut acc = 0.0;
            for i in 0..f.n {
                for j in 0..f.n {
                    acc += kb[(i, j)] * kb[(i, j)] * h1[r.start + j] * h2[r.start + i];
                }
            }
            rotated += f.metric_scale * f.metric_scale * acc;
        }
        rep.record(rotated - direct);
    }
    rep
}

/// `mu_norm(w g w') = mu_norm(g)` for signed permutations `w, w'`.
pub fn weyl_invariance(spec: &GroupSpec, samples: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("weyl_invariance", samples, 1e-10);
    let random_weyl = |rng: &mut ChaCha8Rng| {
        let mut perms = Vec::new();
        let mut signs = Vec::new();
        for f in spec.factors() {
            let mut p: Vec<usize> = (0..f.n).collect();
            for i in (1..f.n).rev() {
                p.swap(i, rng.random_range(0..=i));
            }
            perms.push(p);
            signs.push((0..f.n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect());
        }
        weyl_element(spec, &perms, &signs)
    };
    for _ in 0..samples {
        let g = random_group_element(spec, &mut rng);
        let w = random_weyl(&mut rng);
        let w2 = random_weyl(&mut rng);
        let d = distance_to_origin(&g).unwrap_or(f64::NAN);
        let dw = distance_to_origin(&w.mul(&g).mul(&w2)).unwrap_or(f64::NAN);
        rep.record((d - dw).abs() / d.max(1.0));
    }
    rep
}
