use std::f64::consts::PI;

use super::{counting_n, for_each_mode, QuasiMomentum};
use crate::error::{Error, Result};
use crate::quad;

/// `c` in `ψ(x) = c(1−|x|²)⁴` on the unit ball, fixed by `∫ψ = 1`.
///
/// `4π∫₀¹(1−s²)⁴s² ds = 4π·128/3465`.
pub const BUMP_NORMALIZATION: f64 = 3465.0 / (512.0 * PI);

/// Radial profile of the unit-mass bump.
pub fn bump_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        let u = 1.0 - r * r;
        BUMP_NORMALIZATION * u * u * u * u
    }
}

/// Mass of the bump inside the ball of radius `x` (in bump units), closed form.
fn bump_mass_within(x: f64) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    // 4πc ∫₀ˣ (1−u²)⁴ u² du expanded termwise
    let coeffs = [1.0, -4.0, 6.0, -4.0, 1.0];
    let mut s = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let p = 2 * i as i32 + 3;
        s += c * x.powi(p) / p as f64;
    }
    4.0 * PI * BUMP_NORMALIZATION * s
}

/// Fraction of the mass of `ψ_δ` centred at distance `rho` from the origin
/// that lies inside the ball of radius `radius`.
///
/// Radial symmetry reduces the 3D convolution to an integral over the bump
/// radius `s`; at fixed `s` the captured fraction of the sphere is
/// `(1 + clamp(t, −1, 1))/2` with `t = (R² − ρ² − s²)/(2ρs)`.
fn captured_fraction(rho: f64, radius: f64, delta: f64) -> f64 {
    if rho + delta <= radius {
        return 1.0;
    }
    if rho - delta >= radius {
        return 0.0;
    }
    let split = (radius - rho).abs();
    // for s < split the whole sphere is inside (rho < R) or outside (rho > R)
    let inner = if rho < radius {
        bump_mass_within(split / delta)
    } else {
        0.0
    };
    let shell = quad::integrate(
        |s: f64| {
            let t = ((radius * radius - rho * rho - s * s) / (2.0 * rho * s)).clamp(-1.0, 1.0);
            let frac = 0.5 * (1.0 + t);
            4.0 * PI * s * s * bump_profile(s / delta) / delta.powi(3) * frac
        },
        split,
        delta,
        1,
    );
    inner + shell
}

/// `S_δ(R) = Σ_ξ (χ_{B(R)} * ψ_δ)(ξ+k)`, the bump-smoothed ball count.
///
/// Points deeper than `R−δ` contribute 1 and are counted directly; only the
/// shell `R−δ < |ξ+k| < R+δ` needs quadrature.
pub fn smoothed_count(k: &QuasiMomentum, radius: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::param(format!("smoothing width {delta} must be positive")));
    }
    if !(radius > 0.0) || delta >= radius {
        return Err(Error::param(format!(
            "need 0 < delta < R, got R = {radius}, delta = {delta}"
        )));
    }
    let inner_r = radius - delta;
    let interior = counting_n(k, inner_r * inner_r) as f64;
    let mut shell = 0.0;
    let lo = inner_r * inner_r;
    let hi = (radius + delta) * (radius + delta);
    for_each_mode(k, lo, hi, |_, e| {
        if e > lo && e < hi {
            shell += captured_fraction(e.sqrt(), radius, delta);
        }
    });
    Ok(interior + shell)
}
