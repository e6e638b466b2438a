//! Shifted lattice spectrum `{|ξ+k|² : ξ ∈ ℤ³}` and its counting functions.

mod remainder;
mod smooth;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use remainder::{remainder_exponent_fit, RemainderFit};
pub use smooth::{bump_profile, smoothed_count, BUMP_NORMALIZATION};

/// Relative spacing below which two energies count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Default upper bound on the number of modes a single window may hold.
pub const DEFAULT_MODE_BUDGET: usize = 20_000_000;

/// The Bloch vector `k` that fixes the whole model.
///
/// Components are stored exactly as supplied; energies depend on the
/// representative, so nothing is reduced mod 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiMomentum {
    k: [f64; 3],
    dioph_type: Option<f64>,
    indep_checked: bool,
}

impl QuasiMomentum {
    pub fn new(k: [f64; 3]) -> Result<Self> {
        if k.iter().any(|c| !c.is_finite()) {
            return Err(Error::param(format!("quasimomentum {k:?} has a non-finite component")));
        }
        Ok(QuasiMomentum {
            k,
            dioph_type: None,
            indep_checked: false,
        })
    }

    /// `(1/√2, 1/√3, 1/√5)`, materialized once so every caller sees the same bits.
    pub fn reference() -> Self {
        QuasiMomentum {
            k: reference_components(),
            dioph_type: None,
            indep_checked: false,
        }
    }

    /// Records a claimed Diophantine type `κ`; in three dimensions `κ ≥ 4/3`.
    pub fn with_diophantine_type(mut self, kappa: f64) -> Result<Self> {
        if !(kappa >= 4.0 / 3.0) {
            return Err(Error::param(format!("Diophantine type {kappa} is below 4/3")));
        }
        self.dioph_type = Some(kappa);
        Ok(self)
    }

    pub fn components(&self) -> [f64; 3] {
        self.k
    }

    pub fn diophantine_type(&self) -> Option<f64> {
        self.dioph_type
    }

    pub fn independence_checked(&self) -> bool {
        self.indep_checked
    }

    /// Searches for an integer relation `q₀ + q₁k₁ + q₂k₂ + q₃k₃ ≈ 0` with
    /// `|qᵢ| ≤ bound` (not all of `q₁..q₃` zero).
    pub fn find_rational_relation(&self, bound: i64, tol: f64) -> Option<[i64; 4]> {
        for q1 in -bound..=bound {
            for q2 in -bound..=bound {
                for q3 in -bound..=bound {
                    if q1 == 0 && q2 == 0 && q3 == 0 {
                        continue;
                    }
                    let s = q1 as f64 * self.k[0] + q2 as f64 * self.k[1] + q3 as f64 * self.k[2];
                    let q0 = -s.round();
                    if (s + q0).abs() < tol {
                        return Some([q0 as i64, q1, q2, q3]);
                    }
                }
            }
        }
        None
    }

    /// Heuristic check that `(1, k)` is rationally independent; marks the
    /// quasimomentum as checked on success.
    pub fn check_independence(mut self, bound: i64) -> Result<Self> {
        if let Some(rel) = self.find_rational_relation(bound, 1e-9) {
            return Err(Error::param(format!(
                "quasimomentum {:?} satisfies the integer relation {rel:?}",
                self.k
            )));
        }
        self.indep_checked = true;
        Ok(self)
    }

    #[inline]
    pub fn shifted(&self, xi: [i64; 3]) -> [f64; 3] {
        [
            xi[0] as f64 + self.k[0],
            xi[1] as f64 + self.k[1],
            xi[2] as f64 + self.k[2],
        ]
    }

    /// `|ξ+k|²`, always summed in the same order so energies are bit-reproducible.
    #[inline]
    pub fn energy(&self, xi: [i64; 3]) -> f64 {
        let p = self.shifted(xi);
        p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
    }
}

pub(crate) fn reference_components() -> [f64; 3] {
    [1.0 / 2f64.sqrt(), 1.0 / 3f64.sqrt(), 1.0 / 5f64.sqrt()]
}

/// A lattice point together with its energy and momentum direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeMode {
    pub xi: [i64; 3],
    pub energy: f64,
    /// `(ξ+k)/|ξ+k|`; absent when `ξ+k = 0`.
    pub direction: Option<[f64; 3]>,
}

impl LatticeMode {
    pub fn new(k: &QuasiMomentum, xi: [i64; 3]) -> Self {
        let energy = k.energy(xi);
        let direction = if energy > 0.0 {
            let p = k.shifted(xi);
            let r = energy.sqrt();
            Some([p[0] / r, p[1] / r, p[2] / r])
        } else {
            None
        };
        LatticeMode {
            xi,
            energy,
            direction,
        }
    }
}

/// Energies of all modes in a window, sorted ascending.
#[derive(Clone, Debug)]
pub struct OrderedSpectrum {
    modes: Vec<LatticeMode>,
    energies: Vec<f64>,
    window: (f64, f64),
    k: QuasiMomentum,
    first_index: usize,
}

impl OrderedSpectrum {
    pub fn modes(&self) -> &[LatticeMode] {
        &self.modes
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn k(&self) -> &QuasiMomentum {
        &self.k
    }

    /// Global index of `modes()[0]`: the number of modes below the window.
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Fails with a coverage error unless the window reaches down to `lo` and up to `hi`.
    pub fn require_coverage(&self, lo: f64, hi: f64) -> Result<()> {
        if self.window.1 < hi {
            return Err(Error::Coverage {
                required: hi,
                covered: self.window.1,
            });
        }
        if self.window.0 > lo {
            return Err(Error::Coverage {
                required: lo,
                covered: self.window.0,
            });
        }
        Ok(())
    }

    /// Index range of modes with `lo ≤ energy ≤ hi`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.energies.partition_point(|&e| e < lo);
        let end = self.energies.partition_point(|&e| e <= hi);
        start..end.max(start)
    }

    /// Index of the mode with exactly this energy.
    pub fn position(&self, energy: f64) -> Option<usize> {
        let i = self.energies.partition_point(|&e| e < energy);
        (i < self.energies.len() && self.energies[i] == energy).then_some(i)
    }

    /// Number of modes with energy `≤ x`; valid for `x` inside the window.
    pub fn count_below(&self, x: f64) -> usize {
        self.energies.partition_point(|&e| e <= x)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let map = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record(["xi1", "xi2", "xi3", "energy", "dir_x", "dir_y", "dir_z"])
            .map_err(map)?;
        for m in &self.modes {
            let dir = m
                .direction
                .map(|d| d.map(|c| c.to_string()))
                .unwrap_or_else(|| [String::new(), String::new(), String::new()]);
            w.write_record([
                m.xi[0].to_string(),
                m.xi[1].to_string(),
                m.xi[2].to_string(),
                m.energy.to_string(),
                dir[0].clone(),
                dir[1].clone(),
                dir[2].clone(),
            ])
            .map_err(map)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

/// Integer range of `j` with `(j + shift)² ≤ rem` where the inequality is
/// checked through `accept`, which must be monotone on each side of `-shift`.
#[inline]
fn row_bounds(shift: f64, rem: f64, accept: impl Fn(i64) -> bool) -> Option<(i64, i64)> {
    if rem < 0.0 {
        return None;
    }
    let r = rem.sqrt();
    let mut lo = (-r - shift).ceil() as i64 - 1;
    let mut hi = (r - shift).floor() as i64 + 1;
    while lo <= hi && !accept(lo) {
        lo += 1;
    }
    while hi >= lo && !accept(hi) {
        hi -= 1;
    }
    (lo <= hi).then_some((lo, hi))
}

/// Integer range `lo..=hi` containing every `j` with `(j + shift)² ≤ rem`,
/// padded by one on each side.
#[inline]
fn padded_range(shift: f64, rem: f64) -> Option<(i64, i64)> {
    if rem < 0.0 {
        return None;
    }
    let r = rem.sqrt();
    Some(((-r - shift).floor() as i64 - 1, (r - shift).ceil() as i64 + 1))
}

/// Visits every `ξ` with `lo ≤ |ξ+k|² ≤ hi` for a fixed `ξ₁`, row by row.
///
/// The third coordinate is solved from the quadratic inequality, so only
/// nonempty rows cost anything beyond the boundary checks.
fn visit_slab(k: &QuasiMomentum, xi1: i64, lo: f64, hi: f64, f: &mut impl FnMut([i64; 3], f64)) {
    let kc = k.components();
    let a1 = xi1 as f64 + kc[0];
    let s1 = a1 * a1;
    let Some((j2lo, j2hi)) = padded_range(kc[1], hi - s1) else {
        return;
    };
    for xi2 in j2lo..=j2hi {
        let a2 = xi2 as f64 + kc[1];
        let s12 = s1 + a2 * a2;
        let e = |j: i64| {
            let a3 = j as f64 + kc[2];
            s12 + a3 * a3
        };
        let Some((olo, ohi)) = row_bounds(kc[2], hi - s12, |j| e(j) <= hi) else {
            continue;
        };
        // energies < lo form an inner sub-interval to skip
        let inner = if lo > 0.0 {
            row_bounds(kc[2], lo - s12, |j| e(j) < lo)
        } else {
            None
        };
        match inner {
            Some((ilo, ihi)) => {
                for j in olo..ilo.min(ohi + 1) {
                    f([xi1, xi2, j], e(j));
                }
                for j in (ihi + 1).max(olo)..=ohi {
                    f([xi1, xi2, j], e(j));
                }
            }
            None => {
                for j in olo..=ohi {
                    f([xi1, xi2, j], e(j));
                }
            }
        }
    }
}

fn slab_range(k: &QuasiMomentum, hi: f64) -> Option<(i64, i64)> {
    padded_range(k.components()[0], hi)
}

/// Streams every mode with `lo ≤ energy ≤ hi` in slab order (unsorted).
pub fn for_each_mode(k: &QuasiMomentum, lo: f64, hi: f64, mut f: impl FnMut([i64; 3], f64)) {
    if let Some((a, b)) = slab_range(k, hi) {
        for xi1 in a..=b {
            visit_slab(k, xi1, lo, hi, &mut f);
        }
    }
}

/// Weyl estimate of the number of modes in `[lo, hi]`, padded for the
/// lattice discrepancy.
fn estimated_modes(lo: f64, hi: f64) -> usize {
    let outer = (hi.sqrt() + 1.0).powi(3);
    let inner = (lo.max(0.0).sqrt() - 1.0).max(0.0).powi(3);
    (4.0 / 3.0 * PI * (outer - inner)).ceil() as usize
}

/// All modes with `a ≤ |ξ+k|² ≤ b`, sorted ascending.
pub fn enumerate_window(k: &QuasiMomentum, window: (f64, f64)) -> Result<OrderedSpectrum> {
    enumerate_window_with_budget(k, window, DEFAULT_MODE_BUDGET)
}

pub fn enumerate_window_with_budget(
    k: &QuasiMomentum,
    window: (f64, f64),
    budget: usize,
) -> Result<OrderedSpectrum> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || a > b {
        return Err(Error::param(format!("invalid energy window [{a}, {b}]")));
    }
    let estimated = estimated_modes(a, b);
    if estimated > budget {
        return Err(Error::Capacity { estimated, budget });
    }
    let mut modes: Vec<LatticeMode> = match slab_range(k, b) {
        Some((lo, hi)) => (lo..=hi)
            .into_par_iter()
            .flat_map_iter(|xi1| {
                let mut slab = Vec::new();
                visit_slab(k, xi1, a, b, &mut |xi, _| slab.push(LatticeMode::new(k, xi)));
                slab
            })
            .collect(),
        None => Vec::new(),
    };
    modes.sort_by(|x, y| x.energy.total_cmp(&y.energy).then(x.xi.cmp(&y.xi)));
    for pair in modes.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        if q.energy - p.energy <= DEGENERACY_TOLERANCE * q.energy.max(1.0) {
            return Err(Error::Degeneracy {
                first: p.energy,
                second: q.energy,
                xi_first: p.xi,
                xi_second: q.xi,
            });
        }
    }
    let energies = modes.iter().map(|m| m.energy).collect();
    Ok(OrderedSpectrum {
        modes,
        energies,
        window,
        k: k.clone(),
        first_index: counting_with(k, a, |e, x| e < x),
    })
}

/// `N(x) = #{ξ : |ξ+k|² ≤ x}`, counted row by row without storing modes.
pub fn counting_n(k: &QuasiMomentum, x: f64) -> usize {
    counting_with(k, x, |e, x| e <= x)
}

/// `#{ξ : |ξ+k|² < x}`.
pub fn counting_strict(k: &QuasiMomentum, x: f64) -> usize {
    counting_with(k, x, |e, x| e < x)
}

fn counting_with(k: &QuasiMomentum, x: f64, inside: impl Fn(f64, f64) -> bool + Sync) -> usize {
    if !(x >= 0.0) {
        return 0;
    }
    let kc = k.components();
    let Some((a, b)) = slab_range(k, x) else {
        return 0;
    };
    (a..=b)
        .into_par_iter()
        .map(|xi1| {
            let a1 = xi1 as f64 + kc[0];
            let s1 = a1 * a1;
            let Some((j2lo, j2hi)) = padded_range(kc[1], x - s1) else {
                return 0;
            };
            let mut count = 0usize;
            for xi2 in j2lo..=j2hi {
                let a2 = xi2 as f64 + kc[1];
                let s12 = s1 + a2 * a2;
                let e = |j: i64| {
                    let a3 = j as f64 + kc[2];
                    s12 + a3 * a3
                };
                if let Some((lo, hi)) = row_bounds(kc[2], x - s12, |j| inside(e(j), x)) {
                    count += (hi - lo + 1) as usize;
                }
            }
            count
        })
        .sum()
}

/// `S(R) = N(R²)`: shifted lattice points in the closed ball of radius `R`.
pub fn ball_count_s(k: &QuasiMomentum, radius: f64) -> usize {
    counting_n(k, radius * radius)
}

/// Leading Weyl term `(4/3)π x^{3/2}`.
pub fn weyl_count(x: f64) -> f64 {
    4.0 / 3.0 * PI * x.max(0.0).powf(1.5)
}
