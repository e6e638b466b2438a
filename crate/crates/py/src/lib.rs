//! Python module `scatterlab_py`: a thin layer over the core crate.
//!
//! Quasimomenta are passed as 3-tuples (or `None` for the reference
//! value), energy windows as `(a, b)` pairs.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use scatterlab::greens::green_truncated;
use scatterlab::lattice::{enumerate_window as enumerate, QuasiMomentum};
use scatterlab::quantize::{momentum_measure as measure, top_mass_fraction};
use scatterlab::stats::{pair_correlation, pc_limit, PairCorrConfig};
use scatterlab::{spectral, Error, ScattererConfig};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Parameter(_) | Error::Configuration(_) => PyValueError::new_err(err.to_string()),
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn quasimomentum(k: Option<[f64; 3]>) -> PyResult<QuasiMomentum> {
    match k {
        Some(k) => QuasiMomentum::new(k).map_err(to_py),
        None => Ok(QuasiMomentum::reference()),
    }
}

/// One root of the secular equation.
#[pyclass(get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Eigenvalue {
    // `lambda` is a Python keyword
    #[pyo3(name = "lam")]
    lambda: f64,
    gap_index: usize,
    n_left: f64,
    n_right: f64,
    residual: f64,
}

#[pymethods]
impl Eigenvalue {
    fn __repr__(&self) -> String {
        format!("Eigenvalue(lam={}, gap_index={})", self.lambda, self.gap_index)
    }
}

/// Sorted energies `|ξ+k|²` in `[a, b]`.
#[pyfunction]
#[pyo3(signature = (window, k=None))]
fn enumerate_window(window: (f64, f64), k: Option<[f64; 3]>) -> PyResult<Vec<f64>> {
    let spec = enumerate(&quasimomentum(k)?, window).map_err(to_py)?;
    Ok(spec.energies().to_vec())
}

/// Regularizing constant of the secular equation.
#[pyfunction]
#[pyo3(signature = (k=None))]
fn c0(k: Option<[f64; 3]>) -> PyResult<f64> {
    Ok(spectral::c0(&quasimomentum(k)?))
}

#[pyfunction]
#[pyo3(signature = (lam, k=None))]
fn secular_lhs(lam: f64, k: Option<[f64; 3]>) -> PyResult<f64> {
    spectral::secular_lhs(&quasimomentum(k)?, lam).map_err(to_py)
}

/// Perturbed eigenvalues for every gap meeting `window`.
#[pyfunction]
#[pyo3(signature = (window, phi=0.0, x0=[0.0; 3], k=None))]
fn perturbed_spectrum(window: (f64, f64), phi: f64, x0: [f64; 3], k: Option<[f64; 3]>) -> PyResult<Vec<Eigenvalue>> {
    let cfg = ScattererConfig::new(x0, phi).map_err(to_py)?;
    let roots = spectral::perturbed_spectrum(&quasimomentum(k)?, &cfg, window).map_err(to_py)?;
    Ok(roots
        .into_iter()
        .map(|r| Eigenvalue {
            lambda: r.lambda,
            gap_index: r.gap_index,
            n_left: r.n_left,
            n_right: r.n_right,
            residual: r.residual,
        })
        .collect())
}

/// Normalized momentum measure of `g_{λ,L}` as `(theta, phi, weight)` atoms.
#[pyfunction]
#[pyo3(signature = (lam, width, x0=[0.0; 3], k=None))]
fn momentum_measure(lam: f64, width: f64, x0: [f64; 3], k: Option<[f64; 3]>) -> PyResult<Vec<(f64, f64, f64)>> {
    let v = green_truncated(&quasimomentum(k)?, x0, lam, width).map_err(to_py)?;
    let mu = measure(&v, true).map_err(to_py)?;
    Ok(mu
        .atoms()
        .iter()
        .map(|a| {
            let (theta, phi) = a.angles();
            (theta, phi, a.weight)
        })
        .collect())
}

/// Largest-`j` mass fraction of the measure returned by `momentum_measure`.
#[pyfunction]
#[pyo3(signature = (lam, width, j=1, x0=[0.0; 3], k=None))]
fn top_mass(lam: f64, width: f64, j: usize, x0: [f64; 3], k: Option<[f64; 3]>) -> PyResult<f64> {
    let v = green_truncated(&quasimomentum(k)?, x0, lam, width).map_err(to_py)?;
    Ok(top_mass_fraction(&measure(&v, true).map_err(to_py)?, j))
}

/// `(R, limit)` for `ψ = 1_{[1/2,1]}` and `ĥ = 1_{[−D,D]}` at scale `T`.
#[pyfunction]
#[pyo3(signature = (t, d=1.0, k=None))]
fn pair_corr(t: f64, d: f64, k: Option<[f64; 3]>) -> PyResult<(f64, f64)> {
    let cfg = PairCorrConfig::shell(d, t).map_err(to_py)?;
    let spec = enumerate(&quasimomentum(k)?, (0.0, t)).map_err(to_py)?;
    let r = pair_correlation(&spec, &cfg).map_err(to_py)?;
    Ok((r, pc_limit(&cfg)))
}

#[pymodule]
pub fn scatterlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Eigenvalue>()?;
    m.add_function(wrap_pyfunction!(enumerate_window, m)?)?;
    m.add_function(wrap_pyfunction!(c0, m)?)?;
    m.add_function(wrap_pyfunction!(secular_lhs, m)?)?;
    m.add_function(wrap_pyfunction!(perturbed_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(momentum_measure, m)?)?;
    m.add_function(wrap_pyfunction!(top_mass, m)?)?;
    m.add_function(wrap_pyfunction!(pair_corr, m)?)?;
    Ok(())
}
