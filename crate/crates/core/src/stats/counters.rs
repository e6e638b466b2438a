use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::OrderedSpectrum;

/// Number of energies `≤ t` after checking the spectrum starts at 0 and reaches `t`.
fn prefix_len(spectrum: &OrderedSpectrum, t: f64) -> Result<usize> {
    spectrum.require_coverage(0.0, t)?;
    Ok(spectrum.count_below(t))
}

/// `#{n_i ≤ T : n_{i+1} − n_i > G/√n_{i+1}}`.
pub fn gap_excess_count(spectrum: &OrderedSpectrum, g: f64, t: f64) -> Result<usize> {
    let n = prefix_len(spectrum, t)?;
    let e = spectrum.energies();
    if n == e.len() {
        return Err(Error::Coverage {
            required: t,
            covered: spectrum.window().1,
        });
    }
    Ok((0..n).filter(|&i| e[i + 1] - e[i] > g / e[i + 1].sqrt()).count())
}

/// Number of points of `𝒩(T)` within `D/√n` of `n = e[i]`, the point itself included.
pub(crate) fn cluster_size(e: &[f64], i: usize, d: f64) -> usize {
    let r = d / e[i].sqrt();
    let lo = e[..i].partition_point(|&x| x < e[i] - r);
    let hi = i + e[i..].partition_point(|&x| x <= e[i] + r);
    hi - lo
}

/// `#{n ≤ T : |𝒩(T) ∩ [n − D/√n, n + D/√n]| > E + 1}`.
pub fn cluster_excess_count(spectrum: &OrderedSpectrum, d: f64, e_max: f64, t: f64) -> Result<usize> {
    let n = prefix_len(spectrum, t)?;
    let e = &spectrum.energies()[..n];
    Ok((0..n).filter(|&i| cluster_size(e, i, d) as f64 > e_max + 1.0).count())
}

/// `Σ_{n ∈ 𝒩(T), √m|n − m| > A} (n − m)^{−2}` over the first `len` energies.
pub(crate) fn tail_sum_at(e: &[f64], m: f64, a: f64) -> f64 {
    let sm = m.sqrt();
    e.iter()
        .filter(|&&n| sm * (n - m).abs() > a)
        .map(|&n| 1.0 / ((n - m) * (n - m)))
        .sum()
}

/// `Σ_{n ∈ 𝒩(T), √m|n−m| > A} (n − m)^{−2}`; `m` must be an energy of the spectrum.
pub fn tail_sum(spectrum: &OrderedSpectrum, m: f64, a: f64, t: f64) -> Result<f64> {
    let n = prefix_len(spectrum, t)?;
    if spectrum.position(m).is_none() {
        return Err(Error::param(format!("{m} is not an energy of the spectrum")));
    }
    Ok(tail_sum_at(&spectrum.energies()[..n], m, a))
}

/// `tail_sum(m, A, T)` for every `m ∈ 𝒩(T)`, in spectral order.
pub fn tail_sums(spectrum: &OrderedSpectrum, a: f64, t: f64) -> Result<Vec<f64>> {
    let n = prefix_len(spectrum, t)?;
    let e = &spectrum.energies()[..n];
    Ok(e.par_iter().map(|&m| tail_sum_at(e, m, a)).collect())
}

/// `Σ_{m ∈ 𝒩(T)} tail_sum(m, A, T)/m`, the quantity bounded by `C·T^{3/2}/A^{1/3}`.
pub fn tail_aggregate(spectrum: &OrderedSpectrum, a: f64, t: f64) -> Result<f64> {
    let sums = tail_sums(spectrum, a, t)?;
    Ok(sums
        .iter()
        .zip(spectrum.energies())
        .map(|(s, m)| s / m)
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellCounts {
    /// `counts[j] = #{n ≤ T : j ≤ n^{3/2} < j + 1}`.
    pub counts: Vec<usize>,
    /// `Σ counts[j]²`.
    pub second_moment: u64,
}

/// Counts of energies `n ≤ T` by unit shell of `n^{3/2}`.
pub fn shell_counts(spectrum: &OrderedSpectrum, t: f64) -> Result<ShellCounts> {
    let n = prefix_len(spectrum, t)?;
    let mut counts = vec![0usize; t.powf(1.5).floor() as usize + 1];
    for &x in &spectrum.energies()[..n] {
        let j = (x.powf(1.5).floor() as usize).min(counts.len() - 1);
        counts[j] += 1;
    }
    let second_moment = counts.iter().map(|&c| (c * c) as u64).sum();
    Ok(ShellCounts {
        counts,
        second_moment,
    })
}
