//! The modular surface `PSL(2,Z) \ PSL(2,R)`: reduction to the standard
//! fundamental domain, equal-area binning, and sampling experiments for
//! translated `K`-arcs and solvable sweeps.
//!
//! Here `Gamma` acts on the left and points of the upper half-plane are `g * i`.

pub mod bins;
pub mod sampling;

pub use bins::DomainBins;
pub use sampling::*;

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::mobius;
use crate::error::{Error, Result};
use crate::lie::sl2::{self, wrap_angle, Mat2};
use crate::lie::GroupElement;

pub const REDUCTION_CAP: usize = 10_000;

/// Slack for points on the domain boundary.
const EDGE: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct ReducedPoint {
    /// `word * input = rep`, with `word` in `PSL(2,Z)`.
    pub word: [i64; 4],
    pub rep: Mat2,
    pub z: [f64; 2],
    /// Doubled angle of the `K` factor in `rep = n a k`, in `[0, 2pi)`.
    pub frame_angle: f64,
}

impl ReducedPoint {
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.z[0], self.z[1])
    }
}

pub fn in_domain(z: Complex64) -> bool {
    z.re.abs() <= 0.5 + EDGE && z.norm_sqr() >= 1.0 - EDGE && z.im > 0.0
}

fn checked_mul(x: &[i64; 4], y: &[i64; 4]) -> Result<[i64; 4]> {
    let f = |a: i64, b: i64, c: i64, d: i64| a.checked_mul(b).and_then(|p| c.checked_mul(d).and_then(|q| p.checked_add(q)));
    let r = [
        f(x[0], y[0], x[1], y[2]),
        f(x[0], y[1], x[1], y[3]),
        f(x[2], y[0], x[3], y[2]),
        f(x[2], y[1], x[3], y[3]),
    ];
    match r {
        [Some(a), Some(b), Some(c), Some(d)] => Ok([a, b, c, d]),
        _ => Err(Error::Numeric("reduction word overflowed i64".into())),
    }
}

/// Moves `z` into the fundamental domain by translations and inversions,
/// returning the reduced point and the number of inversions.
pub fn reduce_point(mut z: Complex64) -> Result<(Complex64, usize)> {
    if !(z.im > 0.0) || !z.re.is_finite() {
        return Err(Error::invalid(format!("{z} is not in the upper half-plane")));
    }
    for steps in 0..REDUCTION_CAP {
        z.re -= z.re.round();
        if z.norm_sqr() < 1.0 - EDGE {
            z = -1.0 / z;
        } else {
            return Ok((z, steps));
        }
    }
    Err(Error::Numeric(format!("reduction did not terminate within {REDUCTION_CAP} steps")))
}

pub fn reduce(g: &GroupElement) -> Result<ReducedPoint> {
    let m = g.as_sl2().ok_or_else(|| Error::domain("reduction takes an SL(2) element"))?;
    reduce_mat(&m)
}

pub fn reduce_mat(m: &Mat2) -> Result<ReducedPoint> {
    let mut word = [1i64, 0, 0, 1];
    let mut rep = *m;
    for _ in 0..REDUCTION_CAP {
        let z = mobius(&rep, Complex64::new(0.0, 1.0));
        let n = z.re.round();
        if n != 0.0 {
            let n = n as i64;
            word = checked_mul(&[1, -n, 0, 1], &word)?;
            rep = sl2::mul(&[1.0, -(n as f64), 0.0, 1.0], &rep);
            continue;
        }
        if z.norm_sqr() < 1.0 - EDGE {
            word = checked_mul(&[0, -1, 1, 0], &word)?;
            rep = sl2::mul(&[0.0, -1.0, 1.0, 0.0], &rep);
            continue;
        }
        let frame_angle = wrap_angle(2.0 * rep[2].atan2(rep[3]));
        return Ok(ReducedPoint { word, rep, z: [z.re, z.im], frame_angle });
    }
    Err(Error::Numeric(format!("reduction did not terminate within {REDUCTION_CAP} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lift(z: Complex64) -> Mat2 {
        let s = z.im.sqrt();
        [s, z.re / s, 0.0, 1.0 / s]
    }

    #[test]
    fn translation_and_inversion_examples() {
        let r = reduce_mat(&lift(Complex64::new(5.0, 1.0))).unwrap();
        assert!((r.point() - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(r.word, [1, -5, 0, 1]);
        let r = reduce_mat(&lift(Complex64::new(0.0, 0.5))).unwrap();
        assert!((r.point() - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        let r = reduce_mat(&lift(Complex64::new(0.2, 1.5))).unwrap();
        assert_eq!(r.word, [1, 0, 0, 1]);
    }

    #[test]
    fn word_maps_input_to_rep() {
        let m: Mat2 = [3.7, 1.1, 12.3, 3.9];
        let det = m[0] * m[3] - m[1] * m[2];
        let s = det.sqrt();
        let m = [m[0] / s, m[1] / s, m[2] / s, m[3] / s];
        let r = reduce_mat(&m).unwrap();
        let w = sl2::mul(&sl2::from_int(&r.word), &m);
        assert!(w.iter().zip(&r.rep).all(|(a, b)| (a - b).abs() < 1e-10));
        assert!(in_domain(r.point()));
        assert_eq!(reduce_mat(&r.rep).unwrap().word, [1, 0, 0, 1]);
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(reduce_point(Complex64::new(0.0, -1.0)).is_err());
    }
}
