//! Log-space fits of `Vol(B_T) ~ C T^{(r-1)/2} e^{delta T}`.

use serde::Serialize;

use super::{log_ball_volume, RootSystemData};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    pub t_grid: Vec<f64>,
    /// Pinned exponent `(r-1)/2`.
    pub exponent: f64,
    pub c_est: f64,
    /// `log Vol - delta T - exponent log T - log C_est` per grid point.
    pub residuals: Vec<f64>,
    /// Absolute change of the normalized log volume between consecutive grid points.
    pub increments: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeExponentFit {
    pub exponent: f64,
    pub c_est: f64,
    pub residuals: Vec<f64>,
}

fn check_grid(grid: &[f64], min_points: usize) -> Result<()> {
    if grid.len() < min_points {
        return Err(Error::domain(format!("fit needs at least {min_points} grid points, got {}", grid.len())));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("grid must be positive and strictly increasing"));
    }
    Ok(())
}

pub fn asymptotic_fit(rs: &RootSystemData, grid: &[f64]) -> Result<AsymptoticFit> {
    check_grid(grid, 3)?;
    if grid[grid.len() - 1] < 20.0 {
        return Err(Error::domain("grid must reach T >= 20"));
    }
    let exponent = 0.5 * (rs.rank_r as f64 - 1.0);
    let ys = grid
        .iter()
        .map(|&t| Ok(log_ball_volume(rs, t)? - rs.delta * t - exponent * t.ln()))
        .collect::<Result<Vec<f64>>>()?;
    let log_c = ys.iter().sum::<f64>() / ys.len() as f64;
    Ok(AsymptoticFit {
        t_grid: grid.to_vec(),
        exponent,
        c_est: log_c.exp(),
        residuals: ys.iter().map(|y| y - log_c).collect(),
        increments: ys.windows(2).map(|w| (w[1] - w[0]).abs()).collect(),
    })
}

/// Least squares of `log Vol - delta T` on `(1, log T)`.
pub fn free_exponent_fit(rs: &RootSystemData, grid: &[f64]) -> Result<FreeExponentFit> {
    check_grid(grid, 3)?;
    let xs: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    let ys = grid
        .iter()
        .map(|&t| Ok(log_ball_volume(rs, t)? - rs.delta * t))
        .collect::<Result<Vec<f64>>>()?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    Ok(FreeExponentFit {
        exponent: slope,
        c_est: icpt.exp(),
        residuals: xs.iter().zip(&ys).map(|(x, y)| y - icpt - slope * x).collect(),
    })
}
