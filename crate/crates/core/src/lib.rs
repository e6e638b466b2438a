//! Numerical laboratory for a point scatterer on the flat 3-torus with
//! Floquet–Bloch quasimomentum `k`.
//!
//! The unperturbed spectrum is the shifted lattice `{|ξ+k|²}`; a scatterer
//! at `x₀` adds one eigenvalue per spectral gap, given by the secular
//! equation, with the Green's function `G_λ(·, x₀)` as eigenfunction.
//!
//! * [`lattice`]: enumeration, counting functions `N(x)` and `S(R)`
//! * [`spectral`]: `c₀`, the secular sum and the perturbed eigenvalues
//! * [`greens`]: full and truncated Green's vectors
//! * [`quantize`]: symbols, `Op(a)` matrix elements, momentum measures
//! * [`stats`]: pair correlation, gap/cluster/tail counters, localization filter
//! * [`cli`]: the `scatterlab` command-line front end

pub mod cli;
pub mod error;
pub mod greens;
pub mod lattice;
pub mod quad;
pub mod quantize;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{LatticeMode, OrderedSpectrum, QuasiMomentum};
pub use spectral::{PerturbedEigenvalue, ScattererConfig, SecularEquation};
