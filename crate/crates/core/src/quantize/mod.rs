//! Quantization `Op(a)` of finite polynomial symbols on the torus, matrix
//! elements on Green's vectors, and momentum measures on the sphere.
//!
//! For `a(x, ξ) = Σ â(ζ,l,m) e^{i⟨ζ,x⟩} Y_{l,m}(ξ/|ξ|)` the operator acts on
//! a Fourier mode by `Op(a) e^{i⟨ξ,x⟩} = Σ â(ζ,l,m) Y_{l,m}(dir(ξ)) e^{i⟨ξ+ζ,x⟩}`,
//! with `dir(ξ) = (ξ+k)/|ξ+k|`.

mod harmonics;
mod measure;
mod symbol;

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::{GreenVector, TORUS_VOLUME};
use crate::lattice::{for_each_mode, QuasiMomentum};
use crate::spectral::PerturbedEigenvalue;

pub use harmonics::{sphere_quadrature, ylm, ylm_table, SphericalHarmonicIndex};
pub use measure::{momentum_measure, top_mass_fraction, Atom, MomentumMeasure};
pub use symbol::{Symbol, SymbolKey};

/// `ε(ζ) = ‖2⟨k,ζ⟩‖`, the distance from `2⟨k,ζ⟩` to the nearest integer.
///
/// Since `2⟨ξ,ζ⟩ + |ζ|²` is an integer, every pair of modes `ξ, ξ+ζ` has
/// energies at least `ε(ζ)` apart.
pub fn nonorthogonality_threshold(k: &QuasiMomentum, zeta: [i64; 3]) -> Result<f64> {
    if zeta == [0; 3] {
        return Err(Error::param("zeta must be nonzero"));
    }
    let kc = k.components();
    let t = 2.0 * (kc[0] * zeta[0] as f64 + kc[1] * zeta[1] as f64 + kc[2] * zeta[2] as f64);
    Ok((t - t.round()).abs())
}

/// Energy gap `n(ξ+ζ) − n(ξ) = 2⟨ξ+k,ζ⟩ + |ζ|²`.
pub fn partner_gap(k: &QuasiMomentum, xi: [i64; 3], zeta: [i64; 3]) -> f64 {
    k.energy(add(xi, zeta)) - k.energy(xi)
}

fn add(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn coefficient_index(w: &GreenVector) -> HashMap<[i64; 3], Complex64> {
    w.entries().iter().map(|e| (e.mode.xi, e.coeff)).collect()
}

/// `⟨Op(a) v, w⟩ = 8π³ Σ â(ζ,l,m) Y_{l,m}(dir ξ) c_v(ξ) conj(c_w(ξ+ζ))`.
///
/// Pairs whose partner `ξ+ζ` lies outside the support of `w` contribute
/// nothing and are skipped, so a component with no admissible pair is an
/// exact zero. A mode with `ξ+k = 0` only sees the `l = 0` part.
pub fn op_matrix_element(sym: &Symbol, v: &GreenVector, w: &GreenVector) -> Result<Complex64> {
    v.check_compatible(w)?;
    let lmax = sym.degrees().1;
    let partners = coefficient_index(w);
    let mut total = Complex64::new(0.0, 0.0);
    for e in v.entries() {
        let table = match e.mode.direction {
            Some(d) => harmonics::ylm_table_unchecked(lmax, d),
            None => {
                let mut t = vec![Complex64::new(0.0, 0.0); ((lmax + 1) * (lmax + 1)) as usize];
                t[0] = Complex64::new((0.25 / std::f64::consts::PI).sqrt(), 0.0);
                t
            }
        };
        for (key, &a) in sym.coeffs() {
            if let Some(cw) = partners.get(&add(e.mode.xi, key.zeta)) {
                total += a * table[key.harmonic.packed()] * e.coeff * cw.conj();
            }
        }
    }
    Ok(total * TORUS_VOLUME)
}

/// `⟨e^{i⟨ζ,x⟩} v, v⟩ / ‖v‖²`; exactly 1 for `ζ = 0`.
pub fn position_expectation(zeta: [i64; 3], v: &GreenVector) -> Complex64 {
    if zeta == [0; 3] {
        return Complex64::new(1.0, 0.0);
    }
    let partners = coefficient_index(v);
    let mut total = Complex64::new(0.0, 0.0);
    for e in v.entries() {
        if let Some(c) = partners.get(&add(e.mode.xi, zeta)) {
            total += e.coeff * c.conj();
        }
    }
    total * TORUS_VOLUME / v.norm_sq_exact()
}

/// [`position_expectation`] of the cutoff Green's vector at a perturbed
/// eigenvalue, streamed over the modes without storing them.
///
/// Equals `position_expectation(ζ, &green_full(k, x0, λ, cutoff))`; the
/// distance to the left gap mode is taken from the root's offset.
pub fn position_expectation_streaming(
    k: &QuasiMomentum,
    x0: [f64; 3],
    root: &PerturbedEigenvalue,
    zeta: [i64; 3],
    cutoff: f64,
) -> Result<Complex64> {
    if !(cutoff > root.lambda) {
        return Err(Error::param(format!(
            "cutoff {cutoff} must exceed lambda = {}",
            root.lambda
        )));
    }
    if zeta == [0; 3] {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let lambda = root.lambda;
    let dist = |n: f64| {
        if n == root.n_left {
            -root.offset
        } else {
            n - lambda
        }
    };
    let (mut num, mut den) = (0.0, 0.0);
    for_each_mode(k, 0.0, cutoff, |xi, n| {
        let d = dist(n);
        den += 1.0 / (d * d);
        let partner = k.energy(add(xi, zeta));
        if partner <= cutoff {
            num += 1.0 / (d * dist(partner));
        }
    });
    let phase = zeta[0] as f64 * x0[0] + zeta[1] as f64 * x0[1] + zeta[2] as f64 * x0[2];
    Ok(Complex64::from_polar(num / den, phase))
}
