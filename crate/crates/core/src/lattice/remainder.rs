use serde::Serialize;

use super::{ball_count_s, QuasiMomentum};
use crate::error::{Error, Result};

/// Least-squares fit `log|S(R) − (4/3)πR³| ≈ slope·log R + intercept`.
#[derive(Clone, Debug, Serialize)]
pub struct RemainderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub points_used: usize,
    /// `(R, S(R), S(R) − (4/3)πR³)` for every grid point.
    pub table: Vec<(f64, usize, f64)>,
}

pub fn remainder_exponent_fit(k: &QuasiMomentum, radii: &[f64]) -> Result<RemainderFit> {
    if radii.len() < 8 {
        return Err(Error::param(format!(
            "remainder fit needs at least 8 radii, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::param("radii must be positive and strictly increasing"));
    }
    let table: Vec<(f64, usize, f64)> = radii
        .iter()
        .map(|&r| {
            let s = ball_count_s(k, r);
            (r, s, s as f64 - super::weyl_count(r * r))
        })
        .collect();
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|(_, _, rem)| *rem != 0.0)
        .map(|&(r, _, rem)| (r.ln(), rem.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} radii with nonzero remainder",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RemainderFit {
        slope,
        intercept,
        residual,
        points_used: pts.len(),
        table,
    })
}
