//! The boundary circle of the hyperbolic plane, seen from a basepoint.
//!
//! A basepoint `x` in the upper half-plane carries the Cayley chart
//! `phi_x(z) = (z - x) / (z - conj(x))`, which sends `x` to `0`, the boundary
//! to the unit circle and `inf` to `1`. Boundary points and arcs are angles in
//! this chart. The point of `K\G` represented by `Kh` is `h^-1 * i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::lie::chamber_margin;
use crate::lie::sl2::{self, wrap_angle, Mat2};
use crate::lie::{GroupSpec, WALL_TOLERANCE};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        BoundaryPoint { angle: wrap_angle(angle) }
    }

    /// The cusp `inf`, which every chart sends to angle `0`.
    pub fn infinity() -> Self {
        BoundaryPoint { angle: 0.0 }
    }

    /// The real boundary point `r` in the chart of `x`.
    pub fn from_real(x: Complex64, r: f64) -> Self {
        BoundaryPoint::new(chart(x, Complex64::new(r, 0.0)).arg())
    }

    fn unit(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

/// Counterclockwise half-open arc `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        let len = wrap_angle(end - start);
        if len == 0.0 {
            return Err(Error::invalid("arc is empty; use Arc::full for the whole circle"));
        }
        Ok(Arc { start: wrap_angle(start), len })
    }

    pub fn full() -> Self {
        Arc { start: 0.0, len: TAU }
    }

    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.len >= TAU || wrap_angle(angle - self.start) < self.len
    }

    /// `n` equal arcs starting at `offset`.
    pub fn partition(n: usize, offset: f64) -> Vec<Arc> {
        if n == 1 {
            return vec![Arc { start: wrap_angle(offset), len: TAU }];
        }
        (0..n).map(|k| Arc { start: wrap_angle(offset + TAU * k as f64 / n as f64), len: TAU / n as f64 }).collect()
    }
}

/// Checks that `arcs` tile the circle exactly (up to `1e-12` per junction).
pub fn check_partition(arcs: &[Arc]) -> Result<()> {
    if arcs.is_empty() {
        return Err(Error::domain("empty arc partition"));
    }
    let total: f64 = arcs.iter().map(|a| a.len).sum();
    if (total - TAU).abs() > 1e-9 {
        return Err(Error::domain(format!("arcs cover {total} radians, not 2 pi")));
    }
    let mut order: Vec<&Arc> = arcs.iter().collect();
    order.sort_by(|a, b| a.start.total_cmp(&b.start));
    for w in 0..order.len() {
        let next = order[(w + 1) % order.len()].start;
        let gap = wrap_angle(next - order[w].end() + 1e-12) - 1e-12;
        if gap.abs() > 1e-9 {
            return Err(Error::domain("arcs overlap or leave gaps"));
        }
    }
    Ok(())
}

/// Index of the arc containing `angle`, for a validated partition.
pub fn locate(arcs: &[Arc], angle: f64) -> Option<usize> {
    arcs.iter().position(|a| a.contains(angle))
}

/// Cayley chart of the basepoint `x`.
pub fn chart(x: Complex64, z: Complex64) -> Complex64 {
    (z - x) / (z - x.conj())
}

/// The point `h^-1 * i` of `K h` in the upper half-plane.
pub fn point_of(h: &Mat2) -> Complex64 {
    mobius(&sl2::inverse(h), I)
}

pub fn mobius(g: &Mat2, z: Complex64) -> Complex64 {
    (g[0] * z + g[1]) / (g[2] * z + g[3])
}

/// `g * b` for the Moebius action, in the chart of `x`.
///
/// Composition: `boundary_action(boundary_action(b, g, x), h, x) = boundary_action(b, h g, x)`.
/// For the right action of the orbit experiments, `b gamma^-1` is `boundary_action(b, gamma, x)`.
pub fn boundary_action(b: BoundaryPoint, g: &Mat2, x: Complex64) -> BoundaryPoint {
    // Conjugate g by the chart: C = [[1, -x], [1, -conj x]], C^-1 = [[-conj x, x], [-1, 1]] / (x - conj x).
    let z = b.unit();
    let zc = x.conj();
    let (a, bb, c, d) = (g[0], g[1], g[2], g[3]);
    // g C^-1 (up to the scalar, which cancels).
    let p = [a * -zc - bb, a * x + bb, c * -zc - d, c * x + d];
    // C g C^-1
    let m = [p[0] - x * p[2], p[1] - x * p[3], p[0] - zc * p[2], p[1] - zc * p[3]];
    let w = (m[0] * z + m[1]) / (m[2] * z + m[3]);
    BoundaryPoint::new(w.arg())
}

/// Endpoint of the geodesic ray from `x` through `z`.
pub fn visual_angle(x: Complex64, z: Complex64) -> Result<BoundaryPoint> {
    let w = chart(x, z);
    if !(w.norm() > 1e-15) {
        return Err(Error::domain("visual angle is undefined at the basepoint"));
    }
    Ok(BoundaryPoint::new(w.arg()))
}

/// Poisson kernel of the observer `y` at chart angle `theta` of the basepoint `x`.
pub fn harmonic_density(x: Complex64, y: Complex64, theta: f64) -> f64 {
    let w = chart(x, y);
    (1.0 - w.norm_sqr()) / (Complex64::from_polar(1.0, theta) - w).norm_sqr()
}

/// `m_y(arc)` for an arc in the chart of `x`: the probability measure on the
/// circle invariant under the stabilizer of `y`. Equals `len / 2pi` when `y = x`.
pub fn invariant_measure(x: Complex64, y: Complex64, arc: &Arc) -> f64 {
    if arc.len >= TAU {
        return 1.0;
    }
    let w = chart(x, y);
    if w.norm() < 1e-15 {
        return arc.len / TAU;
    }
    // The disc automorphism zeta -> (zeta - w)/(1 - conj(w) zeta) moves y to the centre.
    let img = |t: f64| {
        let z = Complex64::from_polar(1.0, t);
        ((z - w) / (1.0 - w.conj() * z)).arg()
    };
    wrap_angle(img(arc.end()) - img(arc.start)) / TAU
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionTrajectory {
    pub attractor: BoundaryPoint,
    pub repeller: BoundaryPoint,
    /// Angular distance to the attractor, starting with the initial point.
    pub distances: Vec<f64>,
    pub margin: f64,
    /// `false` on a wall: no convergence is claimed.
    pub contracting: bool,
    /// The start point is the repelling fixed point.
    pub at_repeller: bool,
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Iterates `b -> b exp(a_log)^-1` on the boundary seen from `x`.
pub fn contraction_probe(a_log: &[f64], b: BoundaryPoint, steps: usize, x: Complex64) -> Result<ContractionTrajectory> {
    let spec = GroupSpec::sl(2);
    spec.check_algebra_vector(a_log)?;
    let margin = chamber_margin(&spec, a_log);
    if margin < -WALL_TOLERANCE {
        return Err(Error::domain("a_log lies outside the positive chamber"));
    }
    let a = [a_log[0].exp(), 0.0, 0.0, a_log[1].exp()];
    let attractor = BoundaryPoint::infinity();
    let repeller = BoundaryPoint::from_real(x, 0.0);
    let at_repeller = angular_distance(b.angle, repeller.angle) < 1e-15;
    let mut cur = b;
    let mut distances = vec![angular_distance(cur.angle, attractor.angle)];
    for _ in 0..steps {
        cur = boundary_action(cur, &a, x);
        distances.push(angular_distance(cur.angle, attractor.angle));
    }
    Ok(ContractionTrajectory { attractor, repeller, distances, margin, contracting: margin > WALL_TOLERANCE, at_repeller })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chart_basics() {
        assert!((BoundaryPoint::from_real(I, 0.0).angle - PI).abs() < 1e-15);
        assert!((BoundaryPoint::from_real(I, 1.0).angle - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn parabolic_action() {
        let t = [1.0, 1.0, 0.0, 1.0];
        assert!(boundary_action(BoundaryPoint::infinity(), &t, I).angle.abs() < 1e-15);
        let img = boundary_action(BoundaryPoint::from_real(I, 0.0), &t, I);
        assert!((img.angle - BoundaryPoint::from_real(I, 1.0).angle).abs() < 1e-14);
    }

    #[test]
    fn rotation_shifts_by_twice_the_angle() {
        let theta = 0.3;
        let b = BoundaryPoint::new(1.0);
        let img = boundary_action(b, &sl2::rotation(theta), I);
        assert!(angular_distance(img.angle, b.angle - 2.0 * theta) < 1e-14);
    }

    #[test]
    fn visual_angle_examples() {
        assert!(visual_angle(I, 2.0 * I).unwrap().angle.abs() < 1e-15);
        assert!((visual_angle(I, 0.5 * I).unwrap().angle - PI).abs() < 1e-15);
        assert!(visual_angle(I, I).is_err());
    }

    #[test]
    fn measures() {
        let y = 2.0 * I;
        assert_eq!(invariant_measure(I, y, &Arc::full()), 1.0);
        assert!((invariant_measure(I, I, &Arc::new(0.3, 0.3 + PI).unwrap()) - 0.5).abs() < 1e-15);
        let parts = Arc::partition(8, 0.1);
        let total: f64 = parts.iter().map(|a| invariant_measure(I, y, a)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partitions() {
        assert!(check_partition(&Arc::partition(8, 0.2)).is_ok());
        let bad = vec![Arc::new(0.0, 4.0).unwrap(), Arc::new(3.0, TAU).unwrap()];
        assert!(check_partition(&bad).is_err());
    }

    #[test]
    fn contraction_fixed_point_and_wall() {
        let tr = contraction_probe(&[0.5, -0.5], BoundaryPoint::infinity(), 5, I).unwrap();
        assert!(tr.distances.iter().all(|d| *d == 0.0));
        let wall = contraction_probe(&[0.0, 0.0], BoundaryPoint::new(2.0), 5, I).unwrap();
        assert!(!wall.contracting);
        let rep = contraction_probe(&[0.5, -0.5], BoundaryPoint::new(PI), 5, I).unwrap();
        assert!(rep.at_repeller);
    }
}
