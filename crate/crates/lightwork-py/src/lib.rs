//! Python bindings: the main types and closed forms, plus the seeded Monte
//! Carlo estimators. Import as `lightwork` (rename the built cdylib to
//! `lightwork.so`; see python/smoke_test.py).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lw::ergotropy::{self, C64};
use lw::nalgebra::DMatrix;
use lw::{coarse, erasure, homodyne, mc, nsm, photocount, reversible, thermo};

fn err(e: lw::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Dense complex matrix from real and optional imaginary parts.
fn matrix_from_parts(re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>) -> PyResult<DMatrix<C64>> {
    let n = re.len();
    let im = im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if im.len() != n {
        return Err(PyValueError::new_err(
            "imaginary part must have the same number of rows",
        ));
    }
    let mut m = DMatrix::<C64>::zeros(n, n);
    for (i, (rrow, irow)) in re.iter().zip(&im).enumerate() {
        if rrow.len() != n || irow.len() != n {
            return Err(PyValueError::new_err(format!(
                "row {i} must have {n} entries"
            )));
        }
        for j in 0..n {
            m[(i, j)] = C64::new(rrow[j], irow[j]);
        }
    }
    Ok(m)
}

fn estimate_dict<'py>(py: Python<'py>, est: &mc::McEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mean", est.mean)?;
    d.set_item("std_error", est.std_error)?;
    d.set_item("n_samples", est.n_samples)?;
    Ok(d)
}

/// Energy ladder in ascending order.
#[pyclass(frozen)]
struct HamiltonianSpectrum {
    inner: ergotropy::HamiltonianSpectrum,
}

#[pymethods]
impl HamiltonianSpectrum {
    #[new]
    fn new(energies: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: ergotropy::HamiltonianSpectrum::new(energies).map_err(err)?,
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn energies(&self) -> Vec<f64> {
        self.inner.energies().to_vec()
    }
}

/// Validated density matrix (hermitian, unit trace, positive).
#[pyclass(frozen)]
struct DensityMatrix {
    inner: ergotropy::DensityMatrix,
}

#[pymethods]
impl DensityMatrix {
    #[new]
    #[pyo3(signature = (re, im=None))]
    fn new(re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let m = matrix_from_parts(re, im)?;
        Ok(Self {
            inner: ergotropy::DensityMatrix::new(m).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_diagonal(populations: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: ergotropy::DensityMatrix::from_diagonal(&populations).map_err(err)?,
        })
    }

    #[staticmethod]
    fn thermal(spectrum: &HamiltonianSpectrum, theta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ergotropy::DensityMatrix::thermal(&spectrum.inner, theta).map_err(err)?,
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eigenvalues_descending(&self) -> Vec<f64> {
        self.inner.eigenvalues_descending().to_vec()
    }

    fn diagonal_populations(&self) -> Vec<f64> {
        self.inner.diagonal_populations()
    }

    fn mean_energy(&self, h: &HamiltonianSpectrum) -> PyResult<f64> {
        self.inner.mean_energy(&h.inner).map_err(err)
    }

    fn von_neumann_entropy(&self) -> f64 {
        self.inner.von_neumann_entropy()
    }
}

/// Measurement operators with sum(M^dag M) = 1.
#[pyclass(frozen)]
struct KrausSet {
    inner: nsm::KrausSet,
}

#[pymethods]
impl KrausSet {
    #[new]
    fn new(operators: Vec<(Vec<Vec<f64>>, Option<Vec<Vec<f64>>>)>) -> PyResult<Self> {
        let ms = operators
            .into_iter()
            .map(|(re, im)| matrix_from_parts(re, im))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: nsm::KrausSet::new(ms).map_err(err)?,
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, rho: &DensityMatrix) -> PyResult<DensityMatrix> {
        Ok(DensityMatrix {
            inner: self.inner.apply(&rho.inner).map_err(err)?,
        })
    }
}

#[pyfunction]
fn entropy(nbar: f64) -> PyResult<f64> {
    thermo::entropy(nbar).map_err(err)
}

#[pyfunction]
fn temperature(nbar: f64, omega: f64) -> PyResult<f64> {
    thermo::temperature(nbar, omega).map_err(err)
}

#[pyfunction]
fn free_energy(nbar: f64, omega: f64) -> PyResult<f64> {
    thermo::free_energy(nbar, omega).map_err(err)
}

#[pyfunction]
fn reversible_extract<'py>(
    py: Python<'py>,
    modes: u32,
    nbar: f64,
    nbar_cold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let ens = reversible::ModeEnsemble::new(modes, nbar, nbar_cold).map_err(err)?;
    let out = reversible::extract(&ens).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("nbar_final", out.nbar_final)?;
    d.set_item("work", out.work)?;
    d.set_item("efficiency", out.efficiency)?;
    Ok(d)
}

#[pyfunction]
fn photocount_work(nbar: f64, kappa_sq: f64) -> PyResult<f64> {
    photocount::average_work(nbar, kappa_sq).map_err(err)
}

#[pyfunction]
fn photocount_information(nbar: f64, kappa_sq: f64) -> PyResult<f64> {
    photocount::mutual_information_photocount(nbar, kappa_sq).map_err(err)
}

#[pyfunction]
fn photocount_record_entropy(nbar: f64, kappa_sq: f64) -> PyResult<f64> {
    photocount::detector_entropy_photocount(nbar, kappa_sq).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (nbar, kappa_sq, m, max_n=None))]
fn conditional_distribution(
    nbar: f64,
    kappa_sq: f64,
    m: u32,
    max_n: Option<usize>,
) -> PyResult<Vec<f64>> {
    Ok(photocount::conditional_distribution(nbar, kappa_sq, m, max_n)
        .map_err(err)?
        .probs()
        .to_vec())
}

#[pyfunction]
fn g2_zero(m: u32) -> f64 {
    photocount::g2_zero(m)
}

#[pyfunction]
fn homodyne_optimize<'py>(py: Python<'py>, nbar: f64) -> PyResult<Bound<'py, PyDict>> {
    let opt = homodyne::optimize(nbar).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("xi", opt.xi)?;
    d.set_item("epsilon", opt.epsilon)?;
    d.set_item("w_max", opt.w_max)?;
    Ok(d)
}

#[pyfunction]
fn homodyne_work(nbar: f64, xi: f64, epsilon: f64) -> PyResult<f64> {
    homodyne::gross_work(nbar, xi, epsilon).map_err(err)
}

#[pyfunction]
fn homodyne_displacement_work(nbar: f64, xi: f64, epsilon: f64) -> PyResult<f64> {
    homodyne::displacement_work(nbar, xi, epsilon).map_err(err)
}

#[pyfunction]
fn homodyne_information(nbar: f64, xi: f64, epsilon: f64) -> PyResult<f64> {
    homodyne::mutual_information(nbar, xi, epsilon).map_err(err)
}

#[pyfunction]
fn homodyne_record_entropy(nbar: f64, xi: f64, epsilon: f64) -> PyResult<f64> {
    homodyne::detector_entropy(nbar, xi, epsilon).map_err(err)
}

#[pyfunction]
fn sign_optimize<'py>(py: Python<'py>, nbar: f64) -> PyResult<Bound<'py, PyDict>> {
    let opt = coarse::optimize_sign(nbar).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("xi", opt.xi)?;
    d.set_item("epsilon", opt.epsilon)?;
    d.set_item("w_max", opt.w_max)?;
    Ok(d)
}

#[pyfunction]
fn sign_work<'py>(py: Python<'py>, nbar: f64, xi: f64, epsilon: f64) -> PyResult<Bound<'py, PyDict>> {
    let q = coarse::sign_work(nbar, xi, epsilon).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("total_gross", q.total_gross)?;
    d.set_item("lo_cost", q.lo_cost)?;
    d.set_item("net", q.net)?;
    Ok(d)
}

#[pyfunction]
fn sign_information(nbar: f64, xi: f64, epsilon: f64) -> PyResult<f64> {
    coarse::sign_mutual_information(nbar, xi, epsilon).map_err(err)
}

#[pyfunction]
fn coarse_work(nbar: f64, xi: f64, epsilon: f64, resolution: f64) -> PyResult<f64> {
    let grain = coarse::CoarseGrainConfig::new(coarse::Resolution::Width(resolution), None)
        .map_err(err)?;
    coarse::coarse_work(nbar, xi, epsilon, &grain).map_err(err)
}

#[pyfunction]
fn erasure_bound(scheme: &str, nbar: f64) -> PyResult<f64> {
    let scheme = match scheme {
        "entire" => erasure::ErasureScheme::EntireEnergy,
        "photocount-small" => erasure::ErasureScheme::PhotocountSmallFraction,
        "homodyne-small" => erasure::ErasureScheme::HomodyneSmallFraction,
        "entire-field" => erasure::ErasureScheme::HomodyneEntireField,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown erasure scheme {other:?}; expected entire, photocount-small, \
                 homodyne-small, or entire-field"
            )))
        }
    };
    erasure::td_bound(scheme, nbar).map_err(err)
}

#[pyfunction]
fn optimal_reset<'py>(
    py: Python<'py>,
    nbar_d: f64,
    omega: f64,
    theta_d: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = erasure::optimal_reset(nbar_d, omega, theta_d).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("omega_prime", r.omega_prime)?;
    d.set_item("w1", r.w1)?;
    d.set_item("w2", r.w2)?;
    d.set_item("w3", r.w3)?;
    d.set_item("q_d", r.q_d)?;
    d.set_item("w_r", r.w_r)?;
    Ok(d)
}

#[pyfunction]
fn reset_breakeven(omega: f64, theta_d: f64) -> PyResult<f64> {
    erasure::reset_breakeven(omega, theta_d).map_err(err)
}

// named to dodge the module import of the same name
#[pyfunction]
#[pyo3(name = "ergotropy")]
fn ergotropy_fn(rho: &DensityMatrix, h: &HamiltonianSpectrum) -> PyResult<f64> {
    ergotropy::ergotropy(&rho.inner, &h.inner).map_err(err)
}

#[pyfunction]
fn passive_populations(rho: &DensityMatrix, h: &HamiltonianSpectrum) -> PyResult<Vec<f64>> {
    Ok(ergotropy::passive_state(&rho.inner, &h.inner)
        .map_err(err)?
        .diagonal_populations())
}

#[pyfunction]
fn nsm_cycle<'py>(
    py: Python<'py>,
    h_i: &HamiltonianSpectrum,
    h_f: &HamiltonianSpectrum,
    p_eq: Vec<f64>,
    kraus: &KrausSet,
    theta_c: f64,
    theta_m: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = nsm::nsm_cycle(&h_i.inner, &h_f.inner, &p_eq, &kraus.inner, theta_c, theta_m)
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("w_i", report.w_i)?;
    d.set_item("w_ii", report.w_ii)?;
    d.set_item("q_m", report.q_m)?;
    d.set_item("eta", report.eta)?;
    d.set_item("p_nsm", report.p_nsm.clone())?;
    d.set_item("s_von_neumann", report.s_von_neumann)?;
    d.set_item("theta_prime", report.theta_prime)?;
    d.set_item("theta_prime_finite", report.theta_prime_finite)?;
    d.set_item("delta_w_bound", report.delta_w_bound)?;
    d.set_item("eta_max", report.eta_max)?;
    Ok(d)
}

#[pyfunction]
fn estimate_work_photocount<'py>(
    py: Python<'py>,
    nbar: f64,
    kappa_sq: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let est =
        mc::estimate_work_photocount(nbar, kappa_sq, n_samples, seed, workers).map_err(err)?;
    estimate_dict(py, &est)
}

#[pyfunction]
fn estimate_work_homodyne<'py>(
    py: Python<'py>,
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let est =
        mc::estimate_work_homodyne(nbar, xi, epsilon, n_samples, seed, workers).map_err(err)?;
    estimate_dict(py, &est)
}

#[pyfunction]
fn estimate_work_sign<'py>(
    py: Python<'py>,
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let est = mc::estimate_work_sign(nbar, xi, epsilon, n_samples, seed, workers).map_err(err)?;
    estimate_dict(py, &est)
}

#[pyfunction]
fn estimate_information_photocount<'py>(
    py: Python<'py>,
    nbar: f64,
    kappa_sq: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let scheme = mc::MiScheme::Photocount { nbar, kappa_sq };
    let report = mc::estimate_mutual_information(&scheme, n_samples, seed, workers).map_err(err)?;
    let d = estimate_dict(py, &report.estimate)?;
    d.set_item("bias_bound", report.bias_bound)?;
    d.set_item("undersampled", report.undersampled)?;
    Ok(d)
}

#[pymodule]
fn lightwork(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<HamiltonianSpectrum>()?;
    m.add_class::<DensityMatrix>()?;
    m.add_class::<KrausSet>()?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(temperature, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(reversible_extract, m)?)?;
    m.add_function(wrap_pyfunction!(photocount_work, m)?)?;
    m.add_function(wrap_pyfunction!(photocount_information, m)?)?;
    m.add_function(wrap_pyfunction!(photocount_record_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(g2_zero, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_work, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_displacement_work, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_information, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_record_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(sign_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(sign_work, m)?)?;
    m.add_function(wrap_pyfunction!(sign_information, m)?)?;
    m.add_function(wrap_pyfunction!(coarse_work, m)?)?;
    m.add_function(wrap_pyfunction!(erasure_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_reset, m)?)?;
    m.add_function(wrap_pyfunction!(reset_breakeven, m)?)?;
    m.add_function(wrap_pyfunction!(ergotropy_fn, m)?)?;
    m.add_function(wrap_pyfunction!(passive_populations, m)?)?;
    m.add_function(wrap_pyfunction!(nsm_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_work_photocount, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_work_homodyne, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_work_sign, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_information_photocount, m)?)?;
    Ok(())
}
