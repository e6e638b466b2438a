use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(l, m)` with `|m| ≤ l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SphericalHarmonicIndex {
    l: u32,
    m: i32,
}

impl SphericalHarmonicIndex {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(Error::param(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(SphericalHarmonicIndex { l, m })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Position `l² + l + m` in the packed table returned by [`ylm_table`].
    pub fn packed(&self) -> usize {
        ((self.l * self.l + self.l) as i64 + self.m as i64) as usize
    }
}

fn check_unit(d: [f64; 3]) -> Result<()> {
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if (r - 1.0).abs() > 1e-9 || !r.is_finite() {
        return Err(Error::Normalization(d));
    }
    Ok(())
}

/// Every `Y_{l,m}(d)` with `l ≤ lmax`, packed at index `l² + l + m`.
///
/// Orthonormal on the unit sphere with the Condon–Shortley phase, built
/// from the fully normalized associated Legendre recurrence.
pub fn ylm_table(lmax: u32, d: [f64; 3]) -> Result<Vec<Complex64>> {
    check_unit(d)?;
    Ok(ylm_table_unchecked(lmax, d))
}

pub(crate) fn ylm_table_unchecked(lmax: u32, d: [f64; 3]) -> Vec<Complex64> {
    let lmax = lmax as usize;
    let x = d[2];
    let s = d[0].hypot(d[1]);
    let phi = d[1].atan2(d[0]);
    // p[l][m]: normalized P_l^m(x) including (−1)^m and the 1/√(4π)-type factor
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    p[0][0] = (0.25 / PI).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * x * p[m][m];
    }
    for m in 0..=lmax {
        let mf = m as f64;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
    for l in 0..=lmax {
        let base = l * l + l;
        for m in 0..=l {
            let y = Complex64::from_polar(p[l][m], m as f64 * phi);
            out[base + m] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[base - m] = y.conj() * sign;
            }
        }
    }
    out
}

/// `Y_{l,m}` at a unit direction.
pub fn ylm(idx: SphericalHarmonicIndex, d: [f64; 3]) -> Result<Complex64> {
    Ok(ylm_table(idx.l, d)?[idx.packed()])
}

/// Product rule on the sphere: Gauss–Legendre in `cos θ` times a uniform
/// azimuthal grid. Exact for polynomials of degree `< 2·n_theta` in `cos θ`
/// and trigonometric degree `< n_phi` in `φ`.
///
/// Returns `(direction, weight)` pairs whose weights sum to `4π`.
pub fn sphere_quadrature(n_theta: usize, n_phi: usize) -> Vec<([f64; 3], f64)> {
    let (nodes, weights) = crate::quad::gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (z, w) in nodes.iter().zip(&weights) {
        let s = (1.0 - z * z).sqrt();
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            out.push(([s * phi.cos(), s * phi.sin(), *z], w * dphi));
        }
    }
    out
}
