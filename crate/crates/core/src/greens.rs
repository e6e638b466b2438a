//! Full and truncated Green's vectors `G_λ(·, x₀)` in the Fourier basis.
//!
//! A vector stores coefficients `c(ξ) = −(1/8π³) e^{−i⟨ξ,x₀⟩}/(n−λ)` so that
//! `G(x) = Σ c(ξ) e^{i⟨ξ,x⟩}`. Norms are taken in `L²(T³, dx)`, where
//! `‖e^{i⟨ξ,x⟩}‖² = 8π³`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{enumerate_window, for_each_mode, LatticeMode, OrderedSpectrum, QuasiMomentum};
use crate::quad;
use crate::spectral::{weyl_tail_inv_sq, PerturbedEigenvalue, ResolventSums, POLE_TOLERANCE};

/// `8π³`, the volume of the torus.
pub const TORUS_VOLUME: f64 = 8.0 * PI * PI * PI;

/// Default truncation exponent: `L = λ^{−δ}`.
pub const DEFAULT_DELTA: f64 = 1.0 / 16.0;

/// Which modes a vector carries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Support {
    /// Every mode with `n ≤ cutoff`.
    Cutoff(f64),
    /// The truncation set `A(λ, L)`: modes with `|n − λ| < L`.
    Window(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenEntry {
    pub mode: LatticeMode,
    pub coeff: Complex64,
}

#[derive(Clone, Debug)]
pub struct GreenVector {
    lambda: f64,
    x0: [f64; 3],
    k: QuasiMomentum,
    support: Support,
    entries: Vec<GreenEntry>,
    norm_sq_exact: f64,
    tail_estimate: f64,
    tail_bound: f64,
}

/// `−(1/8π³) e^{−i⟨ξ,x₀⟩}/(n−λ)`.
pub fn green_coefficient(xi: [i64; 3], energy: f64, x0: [f64; 3], lambda: f64) -> Complex64 {
    let phase = xi[0] as f64 * x0[0] + xi[1] as f64 * x0[1] + xi[2] as f64 * x0[2];
    Complex64::from_polar(-1.0 / (TORUS_VOLUME * (energy - lambda)), -phase)
}

/// `Σ_{n>C} (n−λ)^{-2}`, bounded rigorously from the exact count `N(C)`.
pub fn inv_sq_tail_bound(lambda: f64, cutoff: f64, count_at_cutoff: usize) -> f64 {
    quad::counting_tail_bound(|t| (t - lambda).powi(-2), cutoff, count_at_cutoff)
}

impl GreenVector {
    fn build(
        k: &QuasiMomentum,
        x0: [f64; 3],
        lambda: f64,
        support: Support,
        modes: impl IntoIterator<Item = LatticeMode>,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        let mut sum_inv_sq = 0.0;
        for mode in modes {
            let d = mode.energy - lambda;
            if d.abs() <= POLE_TOLERANCE {
                return Err(Error::Pole {
                    lambda,
                    energy: mode.energy,
                    distance: d.abs(),
                });
            }
            sum_inv_sq += 1.0 / (d * d);
            entries.push(GreenEntry {
                mode,
                coeff: green_coefficient(mode.xi, mode.energy, x0, lambda),
            });
        }
        entries.sort_by(|a, b| {
            a.mode
                .energy
                .total_cmp(&b.mode.energy)
                .then(a.mode.xi.cmp(&b.mode.xi))
        });
        Ok(GreenVector {
            lambda,
            x0,
            k: k.clone(),
            support,
            entries,
            norm_sq_exact: sum_inv_sq / TORUS_VOLUME,
            tail_estimate: 0.0,
            tail_bound: 0.0,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn x0(&self) -> [f64; 3] {
        self.x0
    }

    pub fn k(&self) -> &QuasiMomentum {
        &self.k
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// `L` for truncated vectors.
    pub fn truncation(&self) -> Option<f64> {
        match self.support {
            Support::Window(l) => Some(l),
            Support::Cutoff(_) => None,
        }
    }

    pub fn entries(&self) -> &[GreenEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `8π³ Σ |c|²` over the stored entries.
    pub fn norm_sq_exact(&self) -> f64 {
        self.norm_sq_exact
    }

    /// Stored norm plus the Weyl estimate of the modes beyond the cutoff.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq_exact + self.tail_estimate
    }

    /// Weyl-density estimate of the norm carried by modes above the cutoff.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    /// Guaranteed upper bound on the norm carried by modes above the cutoff.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Same vector scaled to unit stored norm (`norm_sq_exact = 1`).
    ///
    /// The tail fields are rescaled with it.
    pub fn normalized(&self) -> GreenVector {
        let s = self.norm_sq_exact.sqrt();
        let mut out = self.clone();
        for e in &mut out.entries {
            e.coeff /= s;
        }
        out.norm_sq_exact = 1.0;
        out.tail_estimate /= self.norm_sq_exact;
        out.tail_bound /= self.norm_sq_exact;
        out
    }

    /// Whether `self` and `other` come from the same `k` and `x₀`.
    pub fn check_compatible(&self, other: &GreenVector) -> Result<()> {
        if self.k != other.k {
            return Err(Error::Configuration("vectors use different quasimomenta".into()));
        }
        if self.x0 != other.x0 {
            return Err(Error::Configuration("vectors use different scatterer positions".into()));
        }
        Ok(())
    }

    /// Writes `xi1,xi2,xi3,energy,re_coeff,im_coeff`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let map = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record(["xi1", "xi2", "xi3", "energy", "re_coeff", "im_coeff"])
            .map_err(map)?;
        for e in &self.entries {
            let xi = e.mode.xi;
            w.write_record([
                xi[0].to_string(),
                xi[1].to_string(),
                xi[2].to_string(),
                e.mode.energy.to_string(),
                e.coeff.re.to_string(),
                e.coeff.im.to_string(),
            ])
            .map_err(map)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    /// JSON sidecar `{lambda, L, norm_sq, tail_bound}`.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda,
            "L": self.truncation(),
            "norm_sq": self.norm_sq(),
            "tail_bound": self.tail_bound,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` next to each other.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let file = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let json_path = csv_path.with_extension("json");
        let text = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar is plain JSON");
        std::fs::write(&json_path, text + "\n").map_err(|e| Error::io(&json_path, e))
    }
}

/// `A(λ, L)` restricted to the modes held by `spectrum`.
pub fn truncation_set(spectrum: &OrderedSpectrum, lambda: f64, width: f64) -> Vec<LatticeMode> {
    let range = spectrum.index_range(lambda - width, lambda + width);
    spectrum.modes()[range]
        .iter()
        .filter(|m| (m.energy - lambda).abs() < width)
        .copied()
        .collect()
}

/// `G_λ` over every mode with `n ≤ cutoff`, with tail bookkeeping for the rest.
pub fn green_full(k: &QuasiMomentum, x0: [f64; 3], lambda: f64, cutoff: f64) -> Result<GreenVector> {
    if !(cutoff > lambda && cutoff.is_finite()) {
        return Err(Error::param(format!("cutoff {cutoff} must exceed lambda = {lambda}")));
    }
    let mut modes = Vec::new();
    for_each_mode(k, 0.0, cutoff, |xi, _| modes.push(LatticeMode::new(k, xi)));
    let count = modes.len();
    let mut v = GreenVector::build(k, x0, lambda, Support::Cutoff(cutoff), modes)?;
    v.tail_estimate = weyl_tail_inv_sq(lambda, cutoff) / TORUS_VOLUME;
    v.tail_bound = inv_sq_tail_bound(lambda, cutoff, count) / TORUS_VOLUME;
    Ok(v)
}

/// `G_{λ,L}`: coefficients over `A(λ, L)` only.
pub fn green_truncated(k: &QuasiMomentum, x0: [f64; 3], lambda: f64, width: f64) -> Result<GreenVector> {
    if !(width > 0.0) {
        return Err(Error::param(format!("truncation width {width} must be positive")));
    }
    let spec = enumerate_window(k, ((lambda - width).max(0.0), (lambda + width).max(0.0)))?;
    green_truncated_from(&spec, x0, lambda, width)
}

/// [`green_truncated`] using an already enumerated spectrum.
pub fn green_truncated_from(
    spectrum: &OrderedSpectrum,
    x0: [f64; 3],
    lambda: f64,
    width: f64,
) -> Result<GreenVector> {
    let modes = truncation_set(spectrum, lambda, width);
    if modes.is_empty() {
        return Err(Error::EmptyTruncation { lambda, width });
    }
    GreenVector::build(spectrum.k(), x0, lambda, Support::Window(width), modes)
}

/// `‖g_λ − g_{λ,L}‖` from the norm ratio `‖G_{λ,L}‖/‖G_λ‖`.
///
/// `G_{λ,L}` is a coordinate projection of `G_λ`, so
/// `‖g_{λ,L} − g_λ‖² = 2 − 2‖G_{λ,L}‖/‖G_λ‖`. The full norm is replaced by
/// its rigorous upper bound, which makes the result an upper bound as well.
pub fn normalized_distance(truncated_norm_sq: f64, full_norm_sq_upper: f64) -> f64 {
    let ratio = (truncated_norm_sq / full_norm_sq_upper).clamp(0.0, 1.0);
    (2.0 - 2.0 * ratio.sqrt()).max(0.0).sqrt()
}

/// Guaranteed upper bound on `‖g_{λ,L} − g_λ‖`.
pub fn truncation_error(
    k: &QuasiMomentum,
    x0: [f64; 3],
    lambda: f64,
    width: f64,
    cutoff: f64,
) -> Result<f64> {
    let full = green_full(k, x0, lambda, cutoff)?;
    let trunc_sq: f64 = full
        .entries()
        .iter()
        .filter(|e| (e.mode.energy - lambda).abs() < width)
        .map(|e| e.coeff.norm_sqr() * TORUS_VOLUME)
        .sum();
    if trunc_sq == 0.0 {
        return Err(Error::EmptyTruncation { lambda, width });
    }
    Ok(normalized_distance(trunc_sq, full.norm_sq_exact() + full.tail_bound()))
}

/// Truncation diagnostics at a perturbed eigenvalue, using prepared resolvent sums.
///
/// Gives the same bound as [`truncation_error`] with the tree-summed full
/// norm, so it can be evaluated for every root of a long spectrum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationReport {
    pub lambda: f64,
    pub width: f64,
    pub modes: usize,
    /// `‖G_{λ,L}‖²`.
    pub truncated_norm_sq: f64,
    /// Upper bound on `‖G_λ‖²`.
    pub full_norm_sq_upper: f64,
    /// Upper bound on `‖g_{λ,L} − g_λ‖`.
    pub error: f64,
}

pub fn truncation_report(
    sums: &ResolventSums,
    spectrum: &OrderedSpectrum,
    root: &PerturbedEigenvalue,
    width: f64,
) -> Result<TruncationReport> {
    let lambda = root.lambda;
    spectrum.require_coverage((lambda - width).max(0.0), lambda + width)?;
    let (_, inv_sq) = sums.anchored_sums(root.n_left, root.offset);
    let full = (inv_sq + inv_sq_tail_bound(lambda, sums.cutoff(), sums.count())) / TORUS_VOLUME;
    let set = truncation_set(spectrum, lambda, width);
    if set.is_empty() {
        return Err(Error::EmptyTruncation { lambda, width });
    }
    let trunc: f64 = set
        .iter()
        .map(|m| {
            let d = if m.energy == root.n_left {
                root.offset
            } else {
                m.energy - lambda
            };
            1.0 / (d * d)
        })
        .sum::<f64>()
        / TORUS_VOLUME;
    Ok(TruncationReport {
        lambda,
        width,
        modes: set.len(),
        truncated_norm_sq: trunc,
        full_norm_sq_upper: full,
        error: normalized_distance(trunc, full),
    })
}

/// `Σ c(ξ) e^{i⟨ξ,x⟩}`.
pub fn evaluate_green(v: &GreenVector, x: [f64; 3]) -> Complex64 {
    v.entries
        .iter()
        .map(|e| {
            let xi = e.mode.xi;
            let phase = xi[0] as f64 * x[0] + xi[1] as f64 * x[1] + xi[2] as f64 * x[2];
            e.coeff * Complex64::from_polar(1.0, phase)
        })
        .sum()
}
