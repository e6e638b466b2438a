//! Regularized secular equation and the perturbed eigenvalues it produces.
//!
//! A root lies in every gap `(n_j, n_{j+1})` of the unperturbed spectrum:
//!
//! ```text
//! Σ_ξ [ 1/(|ξ+k|² − λ) − |ξ+k|²/(|ξ+k|⁴ + 1) ] = c₀ tan(φ/2)
//! ```

mod sums;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_window, for_each_mode, weyl_count, OrderedSpectrum, QuasiMomentum};
use crate::quad;

pub(crate) use sums::KahanSum;
pub use sums::ResolventSums;

/// Energies closer than this to `λ` are treated as poles.
pub const POLE_TOLERANCE: f64 = 1e-9;
/// Gaps narrower than this cannot be resolved in double precision.
pub const MIN_GAP_WIDTH: f64 = 2e-9;
/// Smallest cutoff for the exact part of the secular sum.
pub const MIN_CUTOFF: f64 = 1e4;

/// Exact-summation cutoff `Λ_cut = max(100λ, 10⁴)`.
pub fn default_cutoff(lambda: f64) -> f64 {
    (100.0 * lambda).max(MIN_CUTOFF)
}

/// Position of the scatterer and its self-adjoint extension parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScattererConfig {
    x0: [f64; 3],
    phi: f64,
}

impl ScattererConfig {
    pub fn new(x0: [f64; 3], phi: f64) -> Result<Self> {
        if !(phi > -PI && phi < PI) {
            return Err(Error::param(format!("phi = {phi} must lie strictly inside (-π, π)")));
        }
        if x0.iter().any(|c| !c.is_finite()) {
            return Err(Error::param(format!("x0 = {x0:?} is not finite")));
        }
        Ok(ScattererConfig {
            x0: x0.map(|c| c.rem_euclid(2.0 * PI)),
            phi,
        })
    }

    pub fn x0(&self) -> [f64; 3] {
        self.x0
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// A root of the secular equation in the gap `(n_left, n_right)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbedEigenvalue {
    pub lambda: f64,
    /// Global index `j` of the left mode: `n_j < λ < n_{j+1}`.
    pub gap_index: usize,
    pub n_left: f64,
    pub n_right: f64,
    /// `λ − n_left`, kept separately because it is known to full relative precision.
    pub offset: f64,
    /// Secular-equation residual at the root.
    pub residual: f64,
}

/// `c₀ = Σ_ξ 1/(|ξ+k|⁴ + 1)`: exact sum to `Λ_cut = 10⁴` plus the Weyl tail.
pub fn c0(k: &QuasiMomentum) -> f64 {
    c0_with_cutoff(k, MIN_CUTOFF)
}

/// Sharp sum to `cutoff`, Weyl tail beyond it, and the boundary term
/// `−f(C)·(N(C) − (4/3)πC^{3/2})` from partial summation, which removes the
/// leading cutoff-dependence of the sharp sum.
pub fn c0_with_cutoff(k: &QuasiMomentum, cutoff: f64) -> f64 {
    let mut acc = KahanSum::default();
    let mut count = 0usize;
    for_each_mode(k, 0.0, cutoff, |_, e| {
        acc.add(1.0 / (e * e + 1.0));
        count += 1;
    });
    let discrepancy = count as f64 - weyl_count(cutoff);
    acc.value() + c0_tail(cutoff) - discrepancy / (cutoff * cutoff + 1.0)
}

/// `2π ∫_C^∞ √t/(t²+1) dt`.
fn c0_tail(cutoff: f64) -> f64 {
    2.0 * PI * quad::tail_integral(|u| 2.0 * u * u / (u.powi(4) + 1.0), cutoff.sqrt())
}

/// `∫_U^∞ 2/(u⁴+1) du`.
fn quartic_tail(u: f64) -> f64 {
    quad::tail_integral(|v| 2.0 / (v.powi(4) + 1.0), u)
}

/// Weyl-density tail of the secular sum beyond `C = U²`:
/// `2π ∫_C^∞ √t (λt+1)/((t−λ)(t²+1)) dt = 2π [ ∫_U^∞ 2λ/(u²−λ) du + ∫_U^∞ 2/(u⁴+1) du ]`.
fn secular_tail(lambda: f64, root_cutoff: f64, quartic: f64) -> f64 {
    let u = root_cutoff;
    let pole_part = if lambda > 0.0 {
        let a = lambda.sqrt();
        2.0 * a * (a / u).atanh()
    } else if lambda < 0.0 {
        let b = (-lambda).sqrt();
        -2.0 * b * (b / u).atan()
    } else {
        0.0
    };
    2.0 * PI * (pole_part + quartic)
}

/// Weyl-density estimate of `Σ_{n > C} 1/(n−λ)²`, i.e. `2π ∫_C^∞ √t/(t−λ)² dt`.
pub fn weyl_tail_inv_sq(lambda: f64, cutoff: f64) -> f64 {
    let u = cutoff.sqrt();
    let log_part = if lambda > 0.0 {
        let a = lambda.sqrt();
        (a / u).atanh() / a
    } else if lambda < 0.0 {
        let b = (-lambda).sqrt();
        (b / u).atan() / b
    } else {
        1.0 / u
    };
    2.0 * PI * (u / (cutoff - lambda) + log_part)
}

/// The regularized secular sum for one quasimomentum, prepared for
/// repeated evaluation at `λ ≤ lambda_max`.
#[derive(Clone, Debug)]
pub struct SecularEquation {
    sums: ResolventSums,
    c0: f64,
    root_cutoff: f64,
    quartic: f64,
    /// `N(C) − (4/3)πC^{3/2}` at the cutoff.
    discrepancy: f64,
}

impl SecularEquation {
    /// Uses `Λ_cut = max(100·lambda_max, 10⁴)` for every `λ ≤ lambda_max`.
    pub fn new(k: &QuasiMomentum, lambda_max: f64) -> Result<Self> {
        Self::with_cutoff(k, default_cutoff(lambda_max), lambda_max)
    }

    pub fn with_cutoff(k: &QuasiMomentum, cutoff: f64, lambda_max: f64) -> Result<Self> {
        let sums = ResolventSums::new(k, cutoff, lambda_max)?;
        let root_cutoff = cutoff.sqrt();
        Ok(SecularEquation {
            c0: c0(k),
            root_cutoff,
            discrepancy: sums.count() as f64 - weyl_count(cutoff),
            quartic: quartic_tail(root_cutoff),
            sums,
        })
    }

    pub fn k(&self) -> &QuasiMomentum {
        self.sums.k()
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn cutoff(&self) -> f64 {
        self.sums.cutoff()
    }

    pub fn lambda_max(&self) -> f64 {
        self.sums.lambda_max()
    }

    pub fn resolvent(&self) -> &ResolventSums {
        &self.sums
    }

    /// `c₀ tan(φ/2)`.
    pub fn rhs(&self, cfg: &ScattererConfig) -> f64 {
        self.c0 * (0.5 * cfg.phi()).tan()
    }

    /// Left-hand side at `λ`; fails if `λ` is within [`POLE_TOLERANCE`] of a mode.
    pub fn lhs(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda)?;
        let (distance, energy) = self.sums.distance_to_spectrum(lambda);
        if distance <= POLE_TOLERANCE {
            return Err(Error::Pole {
                lambda,
                energy,
                distance,
            });
        }
        Ok(self.lhs_anchored(lambda, 0.0))
    }

    /// Left-hand side at `anchor + offset` without the pole check.
    pub fn lhs_anchored(&self, anchor: f64, offset: f64) -> f64 {
        let lambda = anchor + offset;
        let (inv, _) = self.sums.anchored_sums(anchor, offset);
        let c = self.cutoff();
        let edge = (lambda * c + 1.0) / ((c - lambda) * (c * c + 1.0));
        inv - self.sums.regularizer() + secular_tail(lambda, self.root_cutoff, self.quartic)
            - self.discrepancy * edge
    }

    /// `d/dλ` of the left-hand side, `Σ (n−λ)^{-2}` including its Weyl tail.
    pub fn derivative(&self, lambda: f64) -> f64 {
        let (_, inv_sq) = self.sums.sums(lambda);
        let c = self.cutoff();
        inv_sq + weyl_tail_inv_sq(lambda, c) - self.discrepancy / ((c - lambda) * (c - lambda))
    }

    fn check_range(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() || lambda > self.lambda_max() {
            return Err(Error::Coverage {
                required: lambda,
                covered: self.lambda_max(),
            });
        }
        Ok(())
    }

    /// Bisects the gap `(spectrum[i], spectrum[i+1])`, where `i` is the
    /// global `gap_index` minus the spectrum's first index.
    pub fn solve_gap(
        &self,
        cfg: &ScattererConfig,
        spectrum: &OrderedSpectrum,
        gap_index: usize,
    ) -> Result<PerturbedEigenvalue> {
        let e = spectrum.energies();
        let local = gap_index
            .checked_sub(spectrum.first_index())
            .filter(|&i| i + 1 < e.len())
            .ok_or_else(|| Error::param(format!("gap {gap_index} is not inside the spectrum")))?;
        self.solve_between(cfg, gap_index, e[local], e[local + 1])
    }

    fn solve_between(
        &self,
        cfg: &ScattererConfig,
        gap_index: usize,
        left: f64,
        right: f64,
    ) -> Result<PerturbedEigenvalue> {
        let width = right - left;
        let fail = |reason: String| Error::Solver {
            gap_index,
            left,
            right,
            reason,
        };
        if !(width > MIN_GAP_WIDTH) {
            return Err(Error::param(format!(
                "gap {gap_index} has width {width:e}, below the {MIN_GAP_WIDTH:e} floor"
            )));
        }
        self.check_range(right)?;
        let target = self.rhs(cfg);
        let f = |x: f64| self.lhs_anchored(left, x) - target;
        let mut lo = POLE_TOLERANCE;
        let mut hi = width - POLE_TOLERANCE;
        let (flo, fhi) = (f(lo), f(hi));
        if !(flo < 0.0 && fhi > 0.0) {
            return Err(fail(format!(
                "no sign change: f(left + 1e-9) = {flo:e}, f(right - 1e-9) = {fhi:e}"
            )));
        }
        let lambda_tol = 1e-10 * right.max(1.0);
        let residual_tol = 1e-10 * (1.0 + target.abs());
        let mut mid = 0.5 * (lo + hi);
        let mut fmid = f(mid);
        for _ in 0..200 {
            if fmid == 0.0 {
                break;
            }
            if fmid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            let next = 0.5 * (lo + hi);
            if next == lo || next == hi {
                break;
            }
            mid = next;
            fmid = f(mid);
            if hi - lo <= lambda_tol && fmid.abs() <= residual_tol {
                break;
            }
        }
        if !fmid.is_finite() {
            return Err(fail(format!("non-finite residual {fmid}")));
        }
        Ok(PerturbedEigenvalue {
            lambda: left + mid,
            gap_index,
            n_left: left,
            n_right: right,
            offset: mid,
            residual: fmid,
        })
    }

    /// One root in every gap of `spectrum` that meets `[a, b]`.
    ///
    /// Gaps narrower than [`MIN_GAP_WIDTH`] are skipped with a warning.
    pub fn perturbed_spectrum(
        &self,
        cfg: &ScattererConfig,
        spectrum: &OrderedSpectrum,
        window: (f64, f64),
    ) -> Result<Vec<PerturbedEigenvalue>> {
        let (a, b) = window;
        let e = spectrum.energies();
        let first = spectrum.first_index();
        let gaps: Vec<usize> = (0..e.len().saturating_sub(1))
            .filter(|&i| e[i] < b && e[i + 1] > a)
            .collect();
        let (lo, _) = spectrum.window();
        let left_ok = lo <= 0.0 || e.first().is_some_and(|&x| x <= a);
        let right_ok = e.last().is_some_and(|&x| x >= b);
        if !left_ok || !right_ok {
            return Err(Error::Coverage {
                required: b,
                covered: spectrum.window().1,
            });
        }
        gaps.par_iter()
            .filter_map(|&i| {
                if e[i + 1] - e[i] <= MIN_GAP_WIDTH {
                    log::warn!(
                        "skipping gap {} of width {:e}: root not separable from the poles",
                        first + i,
                        e[i + 1] - e[i]
                    );
                    return None;
                }
                Some(self.solve_between(cfg, first + i, e[i], e[i + 1]))
            })
            .collect()
    }
}

/// One-off evaluation of the secular left-hand side with `Λ_cut = max(100λ, 10⁴)`.
pub fn secular_lhs(k: &QuasiMomentum, lambda: f64) -> Result<f64> {
    SecularEquation::new(k, lambda.max(0.0) + 1.0)?.lhs(lambda)
}

pub fn solve_gap(
    k: &QuasiMomentum,
    cfg: &ScattererConfig,
    gap_index: usize,
    spectrum: &OrderedSpectrum,
) -> Result<PerturbedEigenvalue> {
    if spectrum.k() != k {
        return Err(Error::Configuration("spectrum built for a different k".into()));
    }
    let top = spectrum.energies().last().copied().unwrap_or(0.0);
    SecularEquation::new(k, top)?.solve_gap(cfg, spectrum, gap_index)
}

/// Enumerates enough of the spectrum around `window` and solves every gap meeting it.
pub fn perturbed_spectrum(
    k: &QuasiMomentum,
    cfg: &ScattererConfig,
    window: (f64, f64),
) -> Result<Vec<PerturbedEigenvalue>> {
    let spectrum = spectrum_around(k, window)?;
    let top = spectrum.energies().last().copied().unwrap_or(window.1);
    SecularEquation::new(k, top)?.perturbed_spectrum(cfg, &spectrum, window)
}

/// Enumerates `window` widened until it holds a mode on each side (or reaches 0).
pub fn spectrum_around(k: &QuasiMomentum, window: (f64, f64)) -> Result<OrderedSpectrum> {
    let (a, b) = window;
    if !(a >= 0.0 && b >= a && b.is_finite()) {
        return Err(Error::param(format!("invalid energy window [{a}, {b}]")));
    }
    let mut pad = 0.5;
    loop {
        let lo = (a - pad).max(0.0);
        let spec = enumerate_window(k, (lo, b + pad))?;
        let e = spec.energies();
        let has_left = lo == 0.0 || e.first().is_some_and(|&x| x < a);
        let has_right = e.last().is_some_and(|&x| x > b);
        if has_left && has_right {
            return Ok(spec);
        }
        pad *= 2.0;
    }
}

/// Writes `gap_index,n_left,n_right,lambda,residual`.
pub fn write_perturbed_csv<W: Write>(roots: &[PerturbedEigenvalue], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
    w.write_record(["gap_index", "n_left", "n_right", "lambda", "residual"])
        .map_err(map)?;
    for r in roots {
        w.write_record([
            r.gap_index.to_string(),
            r.n_left.to_string(),
            r.n_right.to_string(),
            r.lambda.to_string(),
            r.residual.to_string(),
        ])
        .map_err(map)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_perturbed_csv(roots: &[PerturbedEigenvalue], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_perturbed_csv(roots, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn config_validation() {
        assert!(ScattererConfig::new([0.0; 3], PI).is_err());
        assert!(ScattererConfig::new([0.0; 3], -PI).is_err());
        let c = ScattererConfig::new([7.0, -1.0, 0.0], 0.3).unwrap();
        assert_relative_eq!(c.x0()[0], 7.0 - 2.0 * PI, epsilon = 1e-15);
        assert_relative_eq!(c.x0()[1], 2.0 * PI - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn c0_origin_term_and_positivity() {
        let k0 = QuasiMomentum::new([0.0; 3]).unwrap();
        let c = c0_with_cutoff(&k0, 400.0);
        // ξ = 0 contributes exactly 1; the six |ξ|² = 1 neighbours add 3
        assert!(c > 4.0);
        assert!(c0(&QuasiMomentum::reference()) > 0.0);
    }

    #[test]
    fn inv_sq_tail_closed_form_matches_quadrature() {
        for (lambda, cutoff) in [(100.0, 1e4), (-5.0, 400.0), (0.0, 900.0), (30.0, 3000.0)] {
            let q = quad::weyl_tail(|t| 1.0 / (t - lambda).powi(2), cutoff);
            assert_relative_eq!(weyl_tail_inv_sq(lambda, cutoff), q, max_relative = 1e-12);
        }
    }

    #[test]
    fn secular_tail_closed_form_matches_quadrature() {
        for (lambda, cutoff) in [(100.0, 1e4), (-5.0, 1e4), (0.0, 1e4), (250.0, 2.5e4)] {
            let q = quad::weyl_tail(
                |t| (lambda * t + 1.0) / ((t - lambda) * (t * t + 1.0)),
                cutoff,
            );
            let u = f64::sqrt(cutoff);
            assert_relative_eq!(secular_tail(lambda, u, quartic_tail(u)), q, max_relative = 1e-11);
        }
    }

    #[test]
    fn pole_is_rejected() {
        let k = QuasiMomentum::new([0.3, 0.4, 0.45]).unwrap();
        let eq = SecularEquation::with_cutoff(&k, 2000.0, 5.0).unwrap();
        assert!(matches!(eq.lhs(0.4525), Err(Error::Pole { .. })));
        assert!(eq.lhs(0.5).is_ok());
        assert!(matches!(eq.lhs(50.0), Err(Error::Coverage { .. })));
    }

    #[test]
    fn lhs_increases_across_gap_with_sign_change() {
        let k = QuasiMomentum::new([0.3, 0.4, 0.45]).unwrap();
        let eq = SecularEquation::with_cutoff(&k, 4000.0, 5.0).unwrap();
        let (a, b) = (0.4525, 0.5525);
        let xs: Vec<f64> = (1..100).map(|i| a + (b - a) * i as f64 / 100.0).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| eq.lhs(x).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert!(eq.lhs(a + 1e-8).unwrap() < -1e6);
        assert!(eq.lhs(b - 1e-8).unwrap() > 1e6);
    }

    #[test]
    fn phi_zero_root_zeroes_lhs() {
        let k = QuasiMomentum::new([0.3, 0.4, 0.45]).unwrap();
        let spec = enumerate_window(&k, (0.0, 1.0)).unwrap();
        let eq = SecularEquation::with_cutoff(&k, 4000.0, 1.0).unwrap();
        let cfg = ScattererConfig::new([0.0; 3], 0.0).unwrap();
        let root = eq.solve_gap(&cfg, &spec, 0).unwrap();
        assert!(root.lambda > 0.4525 && root.lambda < 0.5525);
        assert!(root.residual.abs() < 1e-8);
    }

    #[test]
    fn root_moves_right_with_phi() {
        let k = QuasiMomentum::reference();
        let spec = enumerate_window(&k, (0.0, 12.0)).unwrap();
        let eq = SecularEquation::with_cutoff(&k, 3000.0, 12.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for phi in [-3.0, -1.0, -0.2, 0.0, 0.5, 2.0, 3.1] {
            let cfg = ScattererConfig::new([0.0; 3], phi).unwrap();
            let r = eq.solve_gap(&cfg, &spec, 5).unwrap();
            assert!(r.lambda > prev);
            prev = r.lambda;
        }
    }

    #[test]
    fn narrow_gap_rejected() {
        let k = QuasiMomentum::reference();
        let eq = SecularEquation::with_cutoff(&k, 2000.0, 5.0).unwrap();
        let cfg = ScattererConfig::new([0.0; 3], 0.0).unwrap();
        assert!(eq.solve_between(&cfg, 0, 1.0, 1.0 + 1e-9).is_err());
    }

    #[test]
    fn csv_columns() {
        let r = PerturbedEigenvalue {
            lambda: 1.5,
            gap_index: 3,
            n_left: 1.0,
            n_right: 2.0,
            offset: 0.5,
            residual: 1e-12,
        };
        let mut buf = Vec::new();
        write_perturbed_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("gap_index,n_left,n_right,lambda,residual\n3,1,2,1.5,"));
    }
}
