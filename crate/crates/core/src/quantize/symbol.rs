use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SphericalHarmonicIndex;
use crate::error::{Error, Result};

/// One basis function `e_{ζ,l,m}(x, ξ) = e^{i⟨ζ,x⟩} Y_{l,m}(ξ/|ξ|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolKey {
    pub zeta: [i64; 3],
    pub harmonic: SphericalHarmonicIndex,
}

/// JSON form of a single coefficient.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SymbolTerm {
    zeta: [i64; 3],
    l: u32,
    m: i32,
    re: f64,
    #[serde(default)]
    im: f64,
}

/// A finite polynomial symbol `a = Σ â(ζ,l,m) e_{ζ,l,m}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Symbol {
    coeffs: BTreeMap<SymbolKey, Complex64>,
}

impl Symbol {
    pub fn new() -> Self {
        Symbol::default()
    }

    /// The constant symbol 1, i.e. `â(0,0,0) = √(4π)`.
    pub fn identity() -> Self {
        Symbol::basis([0; 3], 0, 0, Complex64::new((4.0 * std::f64::consts::PI).sqrt(), 0.0))
            .expect("(0, 0) is a valid harmonic")
    }

    /// `coeff · e_{ζ,l,m}`.
    pub fn basis(zeta: [i64; 3], l: u32, m: i32, coeff: Complex64) -> Result<Self> {
        let mut s = Symbol::new();
        s.add_term(zeta, l, m, coeff)?;
        Ok(s)
    }

    /// Adds `coeff` to `â(ζ,l,m)`.
    pub fn add_term(&mut self, zeta: [i64; 3], l: u32, m: i32, coeff: Complex64) -> Result<()> {
        let key = SymbolKey {
            zeta,
            harmonic: SphericalHarmonicIndex::new(l, m)?,
        };
        *self.coeffs.entry(key).or_default() += coeff;
        Ok(())
    }

    pub fn coeffs(&self) -> &BTreeMap<SymbolKey, Complex64> {
        &self.coeffs
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(N₁, N₂)`: the largest `|ζ|` and the largest `l` present.
    pub fn degrees(&self) -> (f64, u32) {
        self.coeffs.keys().fold((0.0, 0), |(n1, n2), key| {
            let z = key.zeta.map(|c| c as f64);
            let norm = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
            (n1.max(norm), n2.max(key.harmonic.l()))
        })
    }

    /// Real-valuedness: `â(−ζ,l,−m) = (−1)^m conj(â(ζ,l,m))` for every key.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(key, &c)| {
            let h = key.harmonic;
            let mirror = SymbolKey {
                zeta: key.zeta.map(|z| -z),
                harmonic: SphericalHarmonicIndex::new(h.l(), -h.m()).expect("|−m| = |m|"),
            };
            let other = self.coeffs.get(&mirror).copied().unwrap_or_default();
            let sign = if h.m() % 2 == 0 { 1.0 } else { -1.0 };
            (other - c.conj() * sign).norm() <= tol * (1.0 + c.norm())
        })
    }

    /// Parses a JSON list of `{"zeta":[a,b,c],"l":int,"m":int,"re":x,"im":y}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let terms: Vec<SymbolTerm> = serde_json::from_str(text)
            .map_err(|e| Error::param(format!("symbol JSON: {e}")))?;
        let mut s = Symbol::new();
        for t in terms {
            s.add_term(t.zeta, t.l, t.m, Complex64::new(t.re, t.im))?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let terms: Vec<SymbolTerm> = self
            .coeffs
            .iter()
            .map(|(key, c)| SymbolTerm {
                zeta: key.zeta,
                l: key.harmonic.l(),
                m: key.harmonic.m(),
                re: c.re,
                im: c.im,
            })
            .collect();
        serde_json::to_string(&terms).expect("symbol terms serialize")
    }
}
