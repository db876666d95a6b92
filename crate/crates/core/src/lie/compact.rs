//! The maximal compact subgroup `K = prod SO(n_i)`, its finite subgroup `M` of
//! diagonal sign matrices, Weyl representatives and frame distances.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lie::{GroupElement, GroupSpec};

/// All sign vectors of length `n` with product `+1`.
pub fn m_signs(n: usize) -> Vec<Vec<f64>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() % 2 == 0)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

/// Frobenius distance between orthogonal frames, summed in quadrature over blocks.
pub fn frame_distance(k: &GroupElement, l: &GroupElement) -> f64 {
    k.blocks()
        .iter()
        .zip(l.blocks())
        .map(|(a, b)| (a - b).norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// `min_m |k - l m|` over `m` in `M` (right coset `lM`).
pub fn distance_to_right_coset(k: &GroupElement, l: &GroupElement) -> f64 {
    coset_distance(k, l, true)
}

/// `min_m |k - m l|` over `m` in `M` (left coset `Ml`).
pub fn distance_to_left_coset(k: &GroupElement, l: &GroupElement) -> f64 {
    coset_distance(k, l, false)
}

fn coset_distance(k: &GroupElement, l: &GroupElement, right: bool) -> f64 {
    let mut total = 0.0;
    for (a, b) in k.blocks().iter().zip(l.blocks()) {
        let n = a.nrows();
        let best = m_signs(n)
            .iter()
            .map(|signs| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let s = if right { signs[j] } else { signs[i] };
                        let d = a[(i, j)] - s * b[(i, j)];
                        acc += d * d;
                    }
                }
                acc
            })
            .fold(f64::INFINITY, f64::min);
        total += best;
    }
    total.sqrt()
}

/// Haar-random element of `K`: QR of a Gaussian matrix with the sign convention
/// `diag(R) > 0`, then the first column flipped if the determinant is negative.
pub fn haar_k<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> GroupElement {
    let blocks = spec
        .factors()
        .iter()
        .map(|f| {
            let n = f.n;
            let z = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let qr = z.qr();
            let mut q = qr.q();
            let r = qr.r();
            for i in 0..n {
                if r[(i, i)] < 0.0 {
                    q.column_mut(i).neg_mut();
                }
            }
            if q.determinant() < 0.0 {
                q.column_mut(0).neg_mut();
            }
            q
        })
        .collect();
    GroupElement::from_blocks_unchecked(spec.clone(), blocks)
}

/// A signed permutation matrix of determinant one per block (normalizes `A`).
pub fn weyl_element(spec: &GroupSpec, perms: &[Vec<usize>], signs: &[Vec<f64>]) -> GroupElement {
    let blocks = spec
        .factors()
        .iter()
        .enumerate()
        .map(|(b, f)| {
            let n = f.n;
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                m[(i, perms[b][i])] = signs[b][i];
            }
            if m.determinant() < 0.0 {
                m.row_mut(0).neg_mut();
            }
            m
        })
        .collect();
    GroupElement::from_blocks_unchecked(spec.clone(), blocks)
}

/// `exp(X)` for `X` in the Lie algebra (one `n x n` matrix per block).
pub fn exp_algebra(spec: &GroupSpec, x: &[DMatrix<f64>]) -> GroupElement {
    let blocks = x.iter().map(|b| b.clone().exp()).collect();
    GroupElement::from_blocks_unchecked(spec.clone(), blocks)
}

/// Random traceless matrix per block, scaled to total Frobenius norm `radius`.
pub fn random_algebra_direction<R: Rng + ?Sized>(
    spec: &GroupSpec,
    radius: f64,
    symmetric_only: bool,
    rng: &mut R,
) -> Vec<DMatrix<f64>> {
    let mut blocks: Vec<DMatrix<f64>> = spec
        .factors()
        .iter()
        .map(|f| {
            let n = f.n;
            let mut z = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            if symmetric_only {
                z = (&z + z.transpose()) * 0.5;
            }
            let tr = z.trace() / n as f64;
            for i in 0..n {
                z[(i, i)] -= tr;
            }
            z
        })
        .collect();
    let norm = blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
    if norm > 0.0 {
        blocks.iter_mut().for_each(|b| *b *= radius / norm);
    }
    blocks
}

/// Random element with standard Gaussian entries, rescaled to determinant one.
pub fn random_group_element<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> GroupElement {
    let blocks = spec
        .factors()
        .iter()
        .map(|f| loop {
            let n = f.n;
            let mut z = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut det = z.determinant();
            if det.abs() < 1e-6 {
                continue;
            }
            if det < 0.0 {
                z.row_mut(0).neg_mut();
                det = -det;
            }
            break z / det.powf(1.0 / n as f64);
        })
        .collect();
    GroupElement::from_blocks_unchecked(spec.clone(), blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn m_has_right_size() {
        assert_eq!(m_signs(2).len(), 2);
        assert_eq!(m_signs(3).len(), 4);
        assert!(m_signs(4).iter().all(|s| s.iter().product::<f64>() == 1.0));
    }

    #[test]
    fn haar_k_is_special_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = GroupSpec::product(&[3, 2]);
        for _ in 0..20 {
            let k = haar_k(&spec, &mut rng);
            for b in k.blocks() {
                let n = b.nrows();
                assert!((b * b.transpose() - DMatrix::<f64>::identity(n, n)).norm() < 1e-13);
                assert!((b.determinant() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn coset_distance_ignores_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = GroupSpec::sl(3);
        let k = haar_k(&spec, &mut rng);
        let m = weyl_element(&spec, &[vec![0, 1, 2]], &[vec![-1.0, -1.0, 1.0]]);
        assert!(distance_to_right_coset(&k.mul(&m), &k) < 1e-14);
        assert!(distance_to_left_coset(&m.mul(&k), &k) < 1e-14);
    }

    #[test]
    fn exp_of_small_algebra_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = GroupSpec::sl(3);
        let x = random_algebra_direction(&spec, 0.3, false, &mut rng);
        let g = exp_algebra(&spec, &x);
        assert!((g.block(0).determinant() - 1.0).abs() < 1e-12);
    }
}
