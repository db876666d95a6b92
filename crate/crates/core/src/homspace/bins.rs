//! Bins of equal hyperbolic area on the fundamental domain below a height cap,
//! plus one cusp bin above it.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::experiments::{Bin, EmpiricalMeasure};
use crate::volume::quadrature::{integrate, Tolerance};

/// Hyperbolic area of the fundamental domain.
pub const DOMAIN_AREA: f64 = PI / 3.0;

const FLOOR: f64 = 0.866_025_403_784_438_6;

/// Area of the domain inside `[x0, x1] x [y0, y1)`.
pub fn area_rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<f64> {
    let top = if y1.is_finite() { 1.0 / y1 } else { 0.0 };
    let f = |x: f64| (1.0 / y0.max((1.0 - x * x).max(0.0).sqrt()) - top).max(0.0);
    let tol = Tolerance { rel: 1e-13, abs: 1e-15, max_depth: 40 };
    let mut pts = vec![x0];
    if y0 < 1.0 {
        let k = (1.0 - y0 * y0).sqrt();
        for c in [-k, k] {
            if c > x0 && c < x1 {
                pts.push(c);
            }
        }
    }
    pts.push(x1);
    pts.windows(2).map(|w| integrate(f, w[0], w[1], tol).map(|r| r.0)).sum()
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, target: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug)]
pub struct DomainBins {
    /// Height edges from the domain floor up to the cap.
    pub band_edges: Vec<f64>,
    /// Per band, x edges from -1/2 to 1/2.
    pub cuts: Vec<Vec<f64>>,
    /// Probability of each bin under the normalized area, cusp bin last.
    pub expected: Vec<f64>,
}

impl DomainBins {
    pub fn new(band_edges: Vec<f64>, cuts: Vec<Vec<f64>>) -> Result<Self> {
        if band_edges.len() < 2 || cuts.len() != band_edges.len() - 1 {
            return Err(Error::invalid("need one cut list per height band"));
        }
        if (band_edges[0] - FLOOR).abs() > 1e-12 || band_edges.windows(2).any(|w| w[1] <= w[0]) || !band_edges.last().unwrap().is_finite() {
            return Err(Error::invalid("height bands must increase from sqrt(3)/2 to a finite cap"));
        }
        for c in &cuts {
            if c.len() < 2 || (c[0] + 0.5).abs() > 1e-12 || (c.last().unwrap() - 0.5).abs() > 1e-12 || c.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("x cuts must increase from -1/2 to 1/2 in every band"));
            }
        }
        let mut expected = Vec::new();
        for (b, c) in band_edges.windows(2).zip(&cuts) {
            for x in c.windows(2) {
                expected.push(area_rect(x[0], x[1], b[0], b[1])? / DOMAIN_AREA);
            }
        }
        expected.push(1.0 / (band_edges.last().unwrap() * DOMAIN_AREA));
        Ok(DomainBins { band_edges, cuts, expected })
    }

    /// `bands x strips` bins of equal area below `height`.
    pub fn equal_area(bands: usize, strips: usize, height: f64) -> Result<Self> {
        if bands == 0 || strips == 0 || !(height > 1.0) {
            return Err(Error::invalid("need positive band and strip counts and a height above 1"));
        }
        let total = area_rect(-0.5, 0.5, FLOOR, height)?;
        let mut edges = vec![FLOOR];
        for k in 1..bands {
            let target = total * k as f64 / bands as f64;
            edges.push(bisect(|y| area_rect(-0.5, 0.5, FLOOR, y), target, FLOOR, height)?);
        }
        edges.push(height);
        let mut cuts = Vec::new();
        for w in edges.windows(2) {
            let band = area_rect(-0.5, 0.5, w[0], w[1])?;
            let mut c = vec![-0.5];
            for k in 1..strips {
                let target = band * k as f64 / strips as f64;
                c.push(bisect(|x| area_rect(-0.5, x, w[0], w[1]), target, -0.5, 0.5)?);
            }
            c.push(0.5);
            cuts.push(c);
        }
        Self::new(edges, cuts)
    }

    /// The default layout: 5 bands x 4 strips below height 4.
    pub fn standard() -> Self {
        Self::equal_area(5, 4, 4.0).expect("standard layout is valid")
    }

    pub fn len(&self) -> usize {
        self.expected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expected.is_empty()
    }

    pub fn cap(&self) -> f64 {
        *self.band_edges.last().unwrap()
    }

    /// Bin of a reduced point; points on edges go to the upper/right bin.
    pub fn locate(&self, z: Complex64) -> usize {
        if z.im >= self.cap() {
            return self.len() - 1;
        }
        let band = self.band_edges.partition_point(|e| *e <= z.im).clamp(1, self.cuts.len()) - 1;
        let offset: usize = self.cuts[..band].iter().map(|c| c.len() - 1).sum();
        let c = &self.cuts[band];
        offset + (c.partition_point(|e| *e <= z.re).clamp(1, c.len() - 1) - 1)
    }

    pub fn empty_measure(&self) -> EmpiricalMeasure {
        let mut bins = Vec::new();
        for (b, (w, c)) in self.band_edges.windows(2).zip(&self.cuts).enumerate() {
            for (s, x) in c.windows(2).enumerate() {
                bins.push(Bin { id: format!("b{b}s{s}"), lo: vec![x[0], w[0]], hi: vec![x[1], w[1]] });
            }
        }
        bins.push(Bin { id: "cusp".into(), lo: vec![-0.5, self.cap()], hi: vec![0.5, f64::INFINITY] });
        EmpiricalMeasure::new(bins)
    }

    /// `max |p_k / expected_k - 1|` over the truncated bins, cusp bin excluded.
    pub fn max_deviation(&self, m: &EmpiricalMeasure) -> f64 {
        let p = m.normalized();
        p.iter().zip(&self.expected).take(self.len() - 1).map(|(a, e)| (a / e - 1.0).abs()).fold(0.0, f64::max)
    }
}
