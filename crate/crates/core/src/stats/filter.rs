use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counters::{cluster_size, tail_sum_at};
use crate::error::{Error, Result};
use crate::lattice::OrderedSpectrum;
use crate::spectral::{weyl_tail_inv_sq, ScattererConfig, SecularEquation};

/// Thresholds of the localization filter.
///
/// * `g`: a point is dropped when its left gap exceeds `G/√m`
/// * `d`, `e`: dropped when more than `E + 1` points lie within `D/√m`
/// * `f`: dropped when `tail_sum(m, D, T) > F·m`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub g: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl FilterParams {
    pub fn new(g: f64, d: f64, e: f64, f: f64) -> Result<Self> {
        let p = FilterParams { g, d, e, f };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.g >= 1.0 && self.d > 0.0 && self.e >= 1.0 && self.f > 0.0;
        if !ok || [self.g, self.d, self.e, self.f].iter().any(|x| x.is_nan()) {
            return Err(Error::param(format!(
                "filter parameters need G ≥ 1, D > 0, E ≥ 1, F > 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Number of cluster atoms kept besides the nearest one.
    pub fn cluster_atoms(&self) -> usize {
        if self.e.is_finite() {
            self.e.floor() as usize
        } else {
            usize::MAX
        }
    }
}

/// The removal budget `T^{3/2}/G` shared by the three filter stages.
pub fn removal_budget(g: f64, t: f64) -> f64 {
    t.powf(1.5) / g
}

/// Canonical `(E, F)` for given `G`, `D`, `T`.
///
/// `E` is the smallest integer `≥ 1` whose cluster count is within the
/// budget `T^{3/2}/G`; `F` is the smallest threshold for which at most that
/// many `m` have `tail_sum(m, D, T)/m > F`.
pub fn select_filter_params(spectrum: &OrderedSpectrum, g: f64, d: f64, t: f64) -> Result<FilterParams> {
    FilterParams::new(g, d, 1.0, 1.0)?;
    spectrum.require_coverage(0.0, t)?;
    let n = spectrum.count_below(t);
    let e = &spectrum.energies()[..n];
    let budget = removal_budget(g, t);
    let mut sizes: Vec<usize> = (0..n).map(|i| cluster_size(e, i, d)).collect();
    sizes.sort_unstable();
    let mut e_sel = 1usize;
    loop {
        let over = n - sizes.partition_point(|&s| s <= e_sel + 1);
        if over as f64 <= budget {
            break;
        }
        e_sel += 1;
    }
    let mut ratios: Vec<f64> = e.par_iter().map(|&m| tail_sum_at(e, m, d) / m).collect();
    ratios.sort_by(|a, b| b.total_cmp(a));
    let b = budget.floor() as usize;
    let f_sel = match ratios.get(b) {
        Some(&r) if r > 0.0 => r,
        _ => f64::MIN_POSITIVE,
    };
    FilterParams::new(g, d, e_sel as f64, f_sel)
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterOutcome {
    pub t: f64,
    pub params: FilterParams,
    /// `|𝒩(T)|`.
    pub total: usize,
    pub retained: Vec<f64>,
    /// Points failing each test, counted independently over `𝒩(T)`.
    pub removed_gap: usize,
    pub removed_cluster: usize,
    pub removed_tail: usize,
    pub density: f64,
}

/// Removes from `𝒩(T)` every `m` with a large left gap, a crowded
/// neighbourhood, or a heavy tail sum. The lowest energy has no left
/// neighbour and is always removed.
pub fn localization_filter(spectrum: &OrderedSpectrum, params: &FilterParams, t: f64) -> Result<FilterOutcome> {
    params.validate()?;
    spectrum.require_coverage(0.0, t)?;
    let n = spectrum.count_below(t);
    let e = &spectrum.energies()[..n];
    let verdicts: Vec<(bool, bool, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let m = e[i];
            let gap = i == 0 || e[i] - e[i - 1] > params.g / m.sqrt();
            let cluster = cluster_size(e, i, params.d) as f64 > params.e + 1.0;
            let tail = params.f.is_finite() && tail_sum_at(e, m, params.d) > params.f * m;
            (gap, cluster, tail)
        })
        .collect();
    let retained: Vec<f64> = e
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| !(v.0 || v.1 || v.2))
        .map(|(&m, _)| m)
        .collect();
    Ok(FilterOutcome {
        t,
        params: *params,
        total: n,
        removed_gap: verdicts.iter().filter(|v| v.0).count(),
        removed_cluster: verdicts.iter().filter(|v| v.1).count(),
        removed_tail: verdicts.iter().filter(|v| v.2).count(),
        density: if n == 0 { 0.0 } else { retained.len() as f64 / n as f64 },
        retained,
    })
}

/// Split of the momentum mass `Σ (n − λ_m)^{−2}` at the eigenvalue in `m`'s left gap.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Certificate {
    pub m: f64,
    pub lambda: f64,
    pub gap_index: usize,
    /// Largest single atom.
    pub top_atom_mass: f64,
    /// The next `E` atoms.
    pub cluster_mass_atoms: f64,
    /// Everything else, including the Weyl tail above the cutoff.
    pub tail_mass_bound: f64,
    pub total_mass: f64,
    /// `(top + cluster)/total`: the normalized top-`(E+1)` mass.
    pub top_fraction: f64,
    /// `m/G²`, which the top atom exceeds whenever `m` passed the gap test.
    pub top_atom_floor: f64,
}

/// Solves the secular equation in the gap left of `m` and splits the
/// resulting momentum mass into nearest atom, cluster and remainder.
pub fn localized_measure_certificate(
    spectrum: &OrderedSpectrum,
    equation: &SecularEquation,
    cfg: &ScattererConfig,
    m: f64,
    params: &FilterParams,
) -> Result<Certificate> {
    let i = spectrum
        .position(m)
        .ok_or_else(|| Error::param(format!("{m} is not an energy of the spectrum")))?;
    if i == 0 {
        return Err(Error::param(format!("{m} has no left neighbour in the spectrum")));
    }
    let gap_index = spectrum.first_index() + i - 1;
    let root = equation.solve_gap(cfg, spectrum, gap_index)?;
    let e = spectrum.energies();
    let reach = params.cluster_atoms().saturating_add(1).min(e.len());
    let lo = (i - 1).saturating_sub(reach);
    let hi = i.saturating_add(reach);
    if hi >= e.len() || (lo == 0 && spectrum.first_index() > 0 && reach > i - 1) {
        return Err(Error::Coverage {
            required: e[e.len() - 1] + 1.0,
            covered: spectrum.window().1,
        });
    }
    let mut atoms: Vec<f64> = (lo..=hi)
        .map(|j| {
            let d = if j == i - 1 { root.offset } else { e[j] - root.lambda };
            1.0 / (d * d)
        })
        .collect();
    atoms.sort_by(|a, b| b.total_cmp(a));
    let (_, inv_sq) = equation.resolvent().anchored_sums(root.n_left, root.offset);
    let total = inv_sq + weyl_tail_inv_sq(root.lambda, equation.cutoff());
    let top = atoms[0];
    let cluster: f64 = atoms[1..reach.min(atoms.len())].iter().sum();
    Ok(Certificate {
        m,
        lambda: root.lambda,
        gap_index,
        top_atom_mass: top,
        cluster_mass_atoms: cluster,
        tail_mass_bound: total - top - cluster,
        total_mass: total,
        top_fraction: (top + cluster) / total,
        top_atom_floor: m / (params.g * params.g),
    })
}

/// Certificates for every retained point, in spectral order.
pub fn certificates(
    spectrum: &OrderedSpectrum,
    equation: &SecularEquation,
    cfg: &ScattererConfig,
    outcome: &FilterOutcome,
) -> Result<Vec<Certificate>> {
    outcome
        .retained
        .par_iter()
        .map(|&m| localized_measure_certificate(spectrum, equation, cfg, m, &outcome.params))
        .collect()
}
