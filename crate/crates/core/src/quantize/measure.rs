use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::GreenVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub direction: [f64; 3],
    pub weight: f64,
}

impl Atom {
    /// `(θ, φ)` with θ the polar angle from +z and φ ∈ [0, 2π) the azimuth from +x.
    pub fn angles(&self) -> (f64, f64) {
        let d = self.direction;
        let theta = d[2].clamp(-1.0, 1.0).acos();
        let phi = d[1].atan2(d[0]).rem_euclid(2.0 * PI);
        (theta, phi)
    }
}

/// Atomic measure on the sphere with one atom per mode direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentumMeasure {
    atoms: Vec<Atom>,
    normalized: bool,
}

impl MomentumMeasure {
    pub fn from_atoms(atoms: Vec<Atom>, normalize: bool) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateMeasure);
        }
        let atoms = if normalize {
            atoms
                .into_iter()
                .map(|a| Atom {
                    weight: a.weight / total,
                    ..a
                })
                .collect()
        } else {
            atoms
        };
        Ok(MomentumMeasure {
            atoms,
            normalized: normalize,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> Complex64) -> Complex64 {
        self.atoms.iter().map(|a| f(a.direction) * a.weight).sum()
    }

    /// Writes `theta,phi,weight` (radians; θ from +z, φ from +x).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let map = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record(["theta", "phi", "weight"]).map_err(map)?;
        for a in &self.atoms {
            let (t, p) = a.angles();
            w.write_record([t.to_string(), p.to_string(), a.weight.to_string()])
                .map_err(map)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

/// Atoms `(dir(ξ), |c(ξ)|²)`; the unnormalized total times `8π³` is the stored norm.
///
/// A mode with `ξ + k = 0` has no direction and is left out.
pub fn momentum_measure(v: &GreenVector, normalize: bool) -> Result<MomentumMeasure> {
    let atoms = v
        .entries()
        .iter()
        .filter_map(|e| {
            e.mode.direction.map(|direction| Atom {
                direction,
                weight: e.coeff.norm_sqr(),
            })
        })
        .collect();
    MomentumMeasure::from_atoms(atoms, normalize)
}

/// Sum of the `j` largest atom weights, relative to the total mass.
pub fn top_mass_fraction(mu: &MomentumMeasure, j: usize) -> f64 {
    let mut w: Vec<f64> = mu.atoms.iter().map(|a| a.weight).collect();
    let total: f64 = w.iter().sum();
    if j >= w.len() {
        return 1.0;
    }
    w.sort_by(|a, b| b.total_cmp(a));
    w[..j].iter().sum::<f64>() / total
}
