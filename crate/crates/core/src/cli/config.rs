//! TOML run configuration. Every field is optional; resolved values are echoed
//! into the JSON summary of each run.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::PathBuf;

use crate::boundary::Arc;
use crate::error::{Error, Result};
use crate::lattice::{LatticeKind, LatticeSpec};
use crate::lie::{Factor, GroupElement, GroupSpec};

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// `psl2z`, `gamma0`, `gamma` or `product`.
    pub kind: String,
    pub level: Option<u32>,
    /// Row-major entries, four per `SL(2)` factor.
    pub conjugator: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub lattice: Option<LatticeConfig>,
    /// Group for volume and wavefront experiments, e.g. `sl2`, `sl3`, `sl2xsl2`.
    pub group: Option<String>,
    pub t: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub arcs: Option<usize>,
    pub boundary_arcs: Option<usize>,
    pub offset: Option<f64>,
    /// `gamma` or `point`.
    pub mode: Option<String>,
    /// Chart angle of the boundary point; the cusp at infinity when absent.
    pub boundary_angle: Option<f64>,
    pub omega1: Option<Vec<[f64; 2]>>,
    pub omega2: Option<Vec<[f64; 2]>>,
    pub s: Option<Vec<f64>>,
    pub cutoff: Option<f64>,
    pub epsilon: Option<f64>,
    pub c: Option<f64>,
    pub u_radius: Option<f64>,
    pub v_radius: Option<f64>,
    pub o_radius: Option<f64>,
    pub samples: Option<usize>,
    pub margins: Option<Vec<f64>>,
    /// `[start, end)` of one arc.
    pub arc: Option<[f64; 2]>,
    pub matrix: Option<Vec<f64>>,
    pub observer: Option<Vec<f64>>,
    pub bands: Option<usize>,
    pub strips: Option<usize>,
    pub height: Option<f64>,
}

pub fn parse_group(s: &str) -> Result<GroupSpec> {
    let factors = s
        .split('x')
        .map(|f| {
            let n: usize = f
                .trim()
                .strip_prefix("sl")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::invalid(format!("unknown group factor `{f}`; use sl<n> joined by x")))?;
            if n < 2 {
                return Err(Error::invalid("factors must be SL(n) with n >= 2"));
            }
            Ok(Factor::sl(n))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupSpec::new(factors)
}

pub fn parse_lattice(cfg: &LatticeConfig) -> Result<LatticeSpec> {
    let level = || cfg.level.ok_or_else(|| Error::invalid(format!("lattice kind `{}` needs a level", cfg.kind)));
    let kind = match cfg.kind.as_str() {
        "psl2z" => LatticeKind::Psl2z,
        "gamma0" => LatticeKind::Gamma0(level()?),
        "gamma" => LatticeKind::Gamma(level()?),
        "product" => LatticeKind::ProductPsl2z,
        other => return Err(Error::invalid(format!("unknown lattice kind `{other}`"))),
    };
    let spec = if kind.is_product() { GroupSpec::product(&[2, 2]) } else { GroupSpec::sl(2) };
    let g = match &cfg.conjugator {
        None => GroupElement::identity(&spec),
        Some(v) => {
            if v.len() != 4 * spec.factors().len() {
                return Err(Error::invalid(format!("conjugator needs {} entries", 4 * spec.factors().len())));
            }
            let blocks = v.chunks(4).map(|c| nalgebra::DMatrix::from_row_slice(2, 2, c)).collect();
            GroupElement::new(spec, blocks)?
        }
    };
    LatticeSpec::new(kind, g)
}

/// `[start, end]` with `end - start >= 2 pi` is the whole circle.
pub fn parse_arc(a: [f64; 2]) -> Result<Arc> {
    if !(a[0].is_finite() && a[1].is_finite()) {
        return Err(Error::invalid("arc endpoints must be finite"));
    }
    if a[1] - a[0] >= TAU {
        return Ok(Arc::full());
    }
    Arc::new(a[0], a[1])
}

pub fn full_arc() -> [f64; 2] {
    [0.0, TAU]
}

pub fn parse_mat2(v: &[f64]) -> Result<[f64; 4]> {
    let m: [f64; 4] = v.try_into().map_err(|_| Error::invalid("a 2x2 matrix needs 4 entries"))?;
    GroupElement::sl2(m[0], m[1], m[2], m[3])?;
    Ok(m)
}
