//! Group specifications and elements of products of special linear groups.

use std::f64::consts::SQRT_2;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One simple factor SL(n, R) together with the scale of its invariant metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub n: usize,
    pub metric_scale: f64,
}

impl Factor {
    /// Factor with the default metric scale: `sqrt(2)` for SL(2), which makes the
    /// distance the curvature -1 hyperbolic metric, and 1 otherwise.
    pub fn sl(n: usize) -> Self {
        let metric_scale = if n == 2 { SQRT_2 } else { 1.0 };
        Factor { n, metric_scale }
    }
}

/// A product of special linear groups `SL(n_1) x ... x SL(n_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    factors: Vec<Factor>,
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("group spec needs at least one factor"));
        }
        for f in &factors {
            if f.n < 2 {
                return Err(Error::invalid(format!("factor SL({}) has n < 2", f.n)));
            }
            if !(f.metric_scale > 0.0 && f.metric_scale.is_finite()) {
                return Err(Error::invalid(format!(
                    "metric scale {} must be positive",
                    f.metric_scale
                )));
            }
        }
        Ok(GroupSpec { factors })
    }

    pub fn sl(n: usize) -> Self {
        GroupSpec::product(&[n])
    }

    /// Product of SL(n_i) factors with default metric scales.
    ///
    /// # Panics
    /// Panics if `ns` is empty or contains an entry below 2.
    pub fn product(ns: &[usize]) -> Self {
        GroupSpec::new(ns.iter().map(|&n| Factor::sl(n)).collect()).expect("valid factor list")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Real rank, `dim a = sum (n_i - 1)`.
    pub fn rank(&self) -> usize {
        self.factors.iter().map(|f| f.n - 1).sum()
    }

    /// Length of the concatenated diagonal representation of `a`.
    pub fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.n).sum()
    }

    /// Index range of block `i` inside a concatenated diagonal vector.
    pub fn block_range(&self, i: usize) -> Range<usize> {
        let start: usize = self.factors[..i].iter().map(|f| f.n).sum();
        start..start + self.factors[i].n
    }

    pub fn is_rank_one(&self) -> bool {
        self.rank() == 1
    }

    /// Invariant inner product on `a`: `sum_i scale_i^2 * tr(X_i Y_i)`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, f) in self.factors.iter().enumerate() {
            let r = self.block_range(i);
            let s2 = f.metric_scale * f.metric_scale;
            acc += s2 * x[r.clone()].iter().zip(&y[r]).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).sqrt()
    }

    pub(crate) fn check_algebra_vector(&self, a_log: &[f64]) -> Result<()> {
        if a_log.len() != self.ambient_dim() {
            return Err(Error::invalid(format!(
                "a-vector has length {}, expected {}",
                a_log.len(),
                self.ambient_dim()
            )));
        }
        if a_log.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("a-vector has non-finite entries"));
        }
        for i in 0..self.factors.len() {
            let r = self.block_range(i);
            let tr: f64 = a_log[r.clone()].iter().sum();
            let scale: f64 = a_log[r].iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if tr.abs() > 1e-9 * scale {
                return Err(Error::invalid(format!("block {i} of a-vector is not trace zero")));
            }
        }
        Ok(())
    }
}

/// A real unimodular matrix per factor of a [`GroupSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    spec: GroupSpec,
    blocks: Vec<DMatrix<f64>>,
}

impl GroupElement {
    /// Validates shapes, finiteness and `det = 1` per block.
    ///
    /// The determinant tolerance is `1e-9` relative to the Hadamard bound of the
    /// block, so large but exactly unimodular matrices are accepted.
    pub fn new(spec: GroupSpec, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if blocks.len() != spec.factors().len() {
            return Err(Error::invalid(format!(
                "{} blocks for {} factors",
                blocks.len(),
                spec.factors().len()
            )));
        }
        for (i, (b, f)) in blocks.iter().zip(spec.factors()).enumerate() {
            if b.nrows() != f.n || b.ncols() != f.n {
                return Err(Error::invalid(format!("block {i} is not {0}x{0}", f.n)));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("block {i} has non-finite entries")));
            }
            let det = b.determinant();
            let hadamard: f64 = b.column_iter().map(|c| c.norm()).product();
            if (det - 1.0).abs() > 1e-9 * hadamard.max(1.0) {
                return Err(Error::invalid(format!("block {i} has determinant {det}")));
            }
        }
        Ok(GroupElement { spec, blocks })
    }

    pub(crate) fn from_blocks_unchecked(spec: GroupSpec, blocks: Vec<DMatrix<f64>>) -> Self {
        GroupElement { spec, blocks }
    }

    pub fn identity(spec: &GroupSpec) -> Self {
        let blocks = spec.factors().iter().map(|f| DMatrix::identity(f.n, f.n)).collect();
        GroupElement { spec: spec.clone(), blocks }
    }

    /// Element of SL(2) with the default metric, from row-major entries.
    pub fn sl2(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        GroupElement::new(GroupSpec::sl(2), vec![DMatrix::from_row_slice(2, 2, &[a, b, c, d])])
    }

    /// Single-block element from row-major entries.
    pub fn from_rows(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid(format!("expected {} entries", n * n)));
        }
        GroupElement::new(GroupSpec::sl(n), vec![DMatrix::from_row_slice(n, n, entries)])
    }

    /// Element of `spec` from the row-major entries of each block, concatenated.
    pub fn from_row_major(spec: &GroupSpec, entries: &[f64]) -> Result<Self> {
        let need: usize = spec.factors.iter().map(|f| f.n * f.n).sum();
        if entries.len() != need {
            return Err(Error::invalid(format!("expected {need} entries, got {}", entries.len())));
        }
        let mut at = 0;
        let mut blocks = Vec::with_capacity(spec.factors.len());
        for f in &spec.factors {
            blocks.push(DMatrix::from_row_slice(f.n, f.n, &entries[at..at + f.n * f.n]));
            at += f.n * f.n;
        }
        GroupElement::new(spec.clone(), blocks)
    }

    /// `exp(a_log)` as a diagonal element.
    pub fn exp_diag(spec: &GroupSpec, a_log: &[f64]) -> Result<Self> {
        spec.check_algebra_vector(a_log)?;
        let blocks = (0..spec.factors().len())
            .map(|i| {
                let r = spec.block_range(i);
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    r.len(),
                    a_log[r].iter().map(|t| t.exp()),
                ))
            })
            .collect();
        Ok(GroupElement { spec: spec.clone(), blocks })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<f64> {
        &self.blocks[i]
    }

    /// Row-major entries of a 2x2 single-block element.
    pub fn as_sl2(&self) -> Option<[f64; 4]> {
        match self.blocks.as_slice() {
            [b] if b.nrows() == 2 => Some([b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]]),
            _ => None,
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.spec.factors().len(), other.spec.factors().len());
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        GroupElement { spec: self.spec.clone(), blocks }
    }

    pub fn inverse(&self) -> GroupElement {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                if b.nrows() == 2 {
                    DMatrix::from_row_slice(2, 2, &[b[(1, 1)], -b[(0, 1)], -b[(1, 0)], b[(0, 0)]])
                } else {
                    b.clone().try_inverse().expect("unimodular matrices are invertible")
                }
            })
            .collect();
        GroupElement { spec: self.spec.clone(), blocks }
    }

    pub fn transpose(&self) -> GroupElement {
        let blocks = self.blocks.iter().map(|b| b.transpose()).collect();
        GroupElement { spec: self.spec.clone(), blocks }
    }

    /// Largest absolute entry difference over all blocks.
    pub fn max_entry_diff(&self, other: &GroupElement) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry over all blocks.
    pub fn max_abs_entry(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scales() {
        let g = GroupSpec::product(&[2, 3]);
        assert_eq!(g.factors()[0].metric_scale, SQRT_2);
        assert_eq!(g.factors()[1].metric_scale, 1.0);
        assert_eq!(g.rank(), 3);
        assert_eq!(g.block_range(1), 2..5);
    }

    #[test]
    fn rejects_bad_specs_and_elements() {
        assert!(GroupSpec::new(vec![]).is_err());
        assert!(GroupSpec::new(vec![Factor { n: 1, metric_scale: 1.0 }]).is_err());
        assert!(GroupSpec::new(vec![Factor { n: 2, metric_scale: 0.0 }]).is_err());
        assert!(GroupElement::sl2(2.0, 0.0, 0.0, 2.0).is_err());
        assert!(GroupElement::sl2(f64::NAN, 0.0, 0.0, 1.0).is_err());
        assert!(GroupElement::sl2(2.0, 0.0, 0.0, 0.5).is_ok());
    }

    #[test]
    fn inverse_and_norm() {
        let g = GroupElement::sl2(2.0, 3.0, 1.0, 2.0).unwrap();
        let id = g.mul(&g.inverse());
        assert!(id.max_entry_diff(&GroupElement::identity(g.spec())) < 1e-15);
        let spec = GroupSpec::sl(2);
        assert!((spec.norm(&[1.0, -1.0]) - 2.0).abs() < 1e-15);
    }
}
