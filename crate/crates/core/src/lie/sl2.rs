//! Closed-form Cartan geometry for 2x2 matrices.
//!
//! Every `g` in SL(2, R) factors as `R(theta1) diag(e^t, e^-t) R(theta2)` with
//! `R(theta) = [[cos, -sin], [sin, cos]]`. Writing `g` as the sum of a
//! rotation-scaling part `q R(alpha)` and a reflection-scaling part `p F(beta)`
//! gives `t = asinh(p)`, `theta1 + theta2 = alpha`, `theta1 - theta2 = beta`.

use std::f64::consts::TAU;

/// Row-major 2x2 matrix.
pub type Mat2 = [f64; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2Kak {
    pub theta1: f64,
    /// Log of the top singular value, `t >= 0`.
    pub t: f64,
    pub theta2: f64,
}

impl Sl2Kak {
    /// Hyperbolic distance `d(K, Kg) = 2t` (curvature -1).
    pub fn distance(&self) -> f64 {
        2.0 * self.t
    }

    /// Angle of `k1` on the circle `K/{+-1}`, in `[0, 2pi)`.
    pub fn k1_angle(&self) -> f64 {
        wrap_angle(2.0 * self.theta1)
    }

    /// Angle of `k2` on the circle `K/{+-1}`, in `[0, 2pi)`.
    pub fn k2_angle(&self) -> f64 {
        wrap_angle(2.0 * self.theta2)
    }
}

pub fn kak(m: &Mat2) -> Sl2Kak {
    let [a, b, c, d] = *m;
    let e = 0.5 * (a + d);
    let f = 0.5 * (a - d);
    let g = 0.5 * (b + c);
    let h = 0.5 * (c - b);
    let p = f.hypot(g);
    let alpha = h.atan2(e);
    let beta = g.atan2(f);
    Sl2Kak { theta1: 0.5 * (alpha + beta), t: p.asinh(), theta2: 0.5 * (alpha - beta) }
}

/// `d(K, Kg)` for a unimodular 2x2 matrix, `= arccosh(|g|_F^2 / 2)`.
pub fn distance(m: &Mat2) -> f64 {
    let f = 0.5 * (m[0] - m[3]);
    let g = 0.5 * (m[1] + m[2]);
    2.0 * f.hypot(g).asinh()
}

pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [c, -s, s, c]
}

pub fn diag(t: f64) -> Mat2 {
    [t.exp(), 0.0, 0.0, (-t).exp()]
}

pub fn mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

pub fn inverse(m: &Mat2) -> Mat2 {
    [m[3], -m[1], -m[2], m[0]]
}

pub fn reconstruct(k: &Sl2Kak) -> Mat2 {
    mul(&mul(&rotation(k.theta1), &diag(k.t)), &rotation(k.theta2))
}

pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Integer 2x2 matrix as floats.
pub fn from_int(m: &[i64; 4]) -> Mat2 {
    [m[0] as f64, m[1] as f64, m[2] as f64, m[3] as f64]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_distance() {
        let want = 1.5f64.acosh();
        assert!((distance(&[1.0, 1.0, 0.0, 1.0]) - want).abs() < 1e-15);
        assert!((kak(&[1.0, 1.0, 0.0, 1.0]).distance() - want).abs() < 1e-15);
        assert!((distance(&[1f64.exp(), 0.0, 0.0, (-1f64).exp()]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reconstructs() {
        for m in [[2.0, 3.0, 1.0, 2.0], [0.0, -1.0, 1.0, 0.0], [1.0, 0.0, 7.0, 1.0], [-3.0, 1.0, -7.0, 2.0]] {
            let k = kak(&m);
            let r = reconstruct(&k);
            for (x, y) in r.iter().zip(&m) {
                assert!((x - y).abs() < 1e-13, "{m:?} -> {r:?}");
            }
            assert!(k.t >= 0.0);
        }
    }

    #[test]
    fn doubled_angles_ignore_sign() {
        let m = [2.0, 3.0, 1.0, 2.0];
        let n = [-2.0, -3.0, -1.0, -2.0];
        let (a, b) = (kak(&m), kak(&n));
        assert!((a.k1_angle() - b.k1_angle()).abs() < 1e-12);
        assert!((a.k2_angle() - b.k2_angle()).abs() < 1e-12);
    }
}
