//! Spectral statistics at the mean-spacing scale: pair correlation, the
//! gap/cluster/tail counters, and the localization filter built on them.

mod counters;
mod filter;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::OrderedSpectrum;
use crate::quad;

pub use counters::{
    cluster_excess_count, gap_excess_count, shell_counts, tail_aggregate, tail_sum, tail_sums, ShellCounts,
};
pub use filter::{
    certificates, localization_filter, localized_measure_certificate, removal_budget, select_filter_params,
    Certificate, FilterOutcome, FilterParams,
};

/// A real window function with compact support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// Identically zero.
    Zero,
    /// `1` on the closed interval `[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
    /// `exp(1 − 1/(1−u²))` with `u` the position rescaled to `(−1, 1)`; peak value 1.
    Smooth { lo: f64, hi: f64 },
}

impl Window {
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        Self::check(lo, hi)?;
        Ok(Window::Indicator { lo, hi })
    }

    pub fn smooth(lo: f64, hi: f64) -> Result<Self> {
        Self::check(lo, hi)?;
        Ok(Window::Smooth { lo, hi })
    }

    fn check(lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::param(format!("window support [{lo}, {hi}] is invalid")));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Window::Zero => 0.0,
            Window::Indicator { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            Window::Smooth { lo, hi } => {
                if x <= lo || x >= hi {
                    return 0.0;
                }
                let u = (2.0 * x - lo - hi) / (hi - lo);
                (1.0 - 1.0 / (1.0 - u * u)).exp()
            }
        }
    }

    /// Closed interval outside which the window vanishes; `None` for [`Window::Zero`].
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Window::Zero => None,
            Window::Indicator { lo, hi } | Window::Smooth { lo, hi } => Some((lo, hi)),
        }
    }

    fn is_indicator(&self) -> bool {
        matches!(self, Window::Indicator { .. })
    }

    /// `∫ w`.
    pub fn integral(&self) -> f64 {
        match *self {
            Window::Zero => 0.0,
            Window::Indicator { lo, hi } => hi - lo,
            Window::Smooth { lo, hi } => quad::integrate(|x| self.eval(x), lo, hi, 8),
        }
    }
}

/// Windows `ψ₁, ψ₂` (in units of `T`) and the pair window `ĥ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrConfig {
    pub psi1: Window,
    pub psi2: Window,
    pub hhat: Window,
    pub t: f64,
}

impl PairCorrConfig {
    pub fn new(psi1: Window, psi2: Window, hhat: Window, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param(format!("T = {t} must be positive")));
        }
        Ok(PairCorrConfig { psi1, psi2, hhat, t })
    }

    /// `ψ₁ = ψ₂ = 1_{[1/2, 1]}`, `ĥ = 1_{[−D, D]}`.
    pub fn shell(d: f64, t: f64) -> Result<Self> {
        if !(d >= 0.0) {
            return Err(Error::param(format!("D = {d} must be nonnegative")));
        }
        let psi = Window::indicator(0.5, 1.0)?;
        Self::new(psi, psi, Window::indicator(-d, d)?, t)
    }
}

/// `R = 3/(4πT^{3/2}) Σ_{i≠j} ψ₁(n_i/T) ψ₂(n_j/T) ĥ(√T(n_i − n_j))`.
///
/// Candidate partners come from a sorted sweep over the support of `ĥ`;
/// every candidate is then tested with the window itself.
pub fn pair_correlation(spectrum: &OrderedSpectrum, cfg: &PairCorrConfig) -> Result<f64> {
    let (Some((a1, b1)), Some((a2, b2)), Some((hlo, hhi))) =
        (cfg.psi1.support(), cfg.psi2.support(), cfg.hhat.support())
    else {
        return Ok(0.0);
    };
    let t = cfg.t;
    spectrum.require_coverage(t * a1.min(a2).max(0.0), t * b1.max(b2))?;
    let e = spectrum.energies();
    let st = t.sqrt();
    // ĥ(√T(n_i − n_j)) ≠ 0 needs n_j ∈ [n_i − hhi/√T, n_i − hlo/√T]; pad for rounding
    let pad = 1e-9 * (1.0 + t);
    let mut total = 0.0;
    for i in spectrum.index_range(t * a1, t * b1) {
        let w1 = cfg.psi1.eval(e[i] / t);
        if w1 == 0.0 {
            continue;
        }
        let lo = e[i] - hhi / st - pad;
        let hi = e[i] - hlo / st + pad;
        for j in spectrum.index_range(lo, hi) {
            if j == i {
                continue;
            }
            let w2 = cfg.psi2.eval(e[j] / t);
            if w2 != 0.0 {
                total += w1 * w2 * cfg.hhat.eval(st * (e[i] - e[j]));
            }
        }
    }
    Ok(3.0 / (4.0 * PI * t.powf(1.5)) * total)
}

/// Ordered pairs `(n, m)`, `n ≠ m`, in `(T/2, T]` with `√T|n − m| ≤ D`.
pub fn pair_count(spectrum: &OrderedSpectrum, d: f64, t: f64) -> Result<u64> {
    spectrum.require_coverage(0.5 * t, t)?;
    let e = spectrum.energies();
    let st = t.sqrt();
    let inside = |x: f64| x > 0.5 * t && x <= t;
    let pad = 1e-9 * (1.0 + t);
    let mut count = 0u64;
    for i in spectrum.index_range(0.5 * t, t) {
        if !inside(e[i]) {
            continue;
        }
        for j in spectrum.index_range(e[i] - d / st - pad, e[i] + d / st + pad) {
            if j != i && inside(e[j]) && st * (e[i] - e[j]).abs() <= d {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `3π (∫ĥ)(∫₀^∞ ψ₁ψ₂ r dr)`, in closed form when every window is an indicator.
pub fn pc_limit(cfg: &PairCorrConfig) -> f64 {
    let h = cfg.hhat.integral();
    let (Some((a1, b1)), Some((a2, b2))) = (cfg.psi1.support(), cfg.psi2.support()) else {
        return 0.0;
    };
    let lo = a1.max(a2).max(0.0);
    let hi = b1.min(b2);
    if hi <= lo || h == 0.0 {
        return 0.0;
    }
    let radial = if cfg.psi1.is_indicator() && cfg.psi2.is_indicator() {
        0.5 * (hi * hi - lo * lo)
    } else {
        quad::integrate(|r| cfg.psi1.eval(r) * cfg.psi2.eval(r) * r, lo, hi, 8)
    };
    3.0 * PI * h * radial
}
