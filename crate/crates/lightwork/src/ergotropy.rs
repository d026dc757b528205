//! Finite-dimensional ergotropy: the unitarily extractable work of a state
//! under a fixed energy ladder, and the passive state left behind.
//!
//! The minimum over unitaries is reached by the rearrangement that pairs
//! state eigenvalues sorted descending with energies sorted ascending, so
//! both quantities come from one Hermitian eigendecomposition. Matrices are
//! expressed in the energy eigenbasis of the active Hamiltonian and capped
//! at 64 levels.

use crate::error::{check_pos, Error, Result};
use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIG_FLOOR: f64 = -1e-12;
pub const MAX_DIM: usize = 64;

/// Energy ladder E_0 <= E_1 <= ..., in units of the reference mode quantum.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpectrum {
    energies: Vec<f64>,
}

impl HamiltonianSpectrum {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() || energies.len() > MAX_DIM {
            return Err(Error::invalid(format!(
                "spectrum needs 1..={MAX_DIM} levels, got {}",
                energies.len()
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("spectrum entries must be finite"));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("spectrum must be sorted ascending"));
        }
        Ok(Self { energies })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

/// State of a d-level system in the energy eigenbasis.
///
/// Validation happens once at construction: Hermiticity and unit trace to
/// 1e-12, eigenvalues above -1e-12. The eigenvalues are kept (sorted
/// descending) so downstream calls need no second decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || d > MAX_DIM || matrix.ncols() != d {
            return Err(Error::invalid(format!(
                "state must be square with 1..={MAX_DIM} levels, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut herm_dev = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                herm_dev = herm_dev.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::invalid(format!(
                "state is not Hermitian: deviation {herm_dev:.3e}"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::invalid(format!(
                "state trace must be 1, got {} + {}i",
                trace.re, trace.im
            )));
        }
        let mut eigenvalues: Vec<f64> = matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        if let Some(&min) = eigenvalues.last() {
            if min < EIG_FLOOR {
                return Err(Error::invalid(format!(
                    "state has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self {
            matrix,
            eigenvalues,
        })
    }

    /// Diagonal state from populations (normalized, nonnegative to -1e-12).
    pub fn from_diagonal(populations: &[f64]) -> Result<Self> {
        let diag = DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        );
        Self::new(DMatrix::from_diagonal(&diag))
    }

    /// Gibbs state of the given ladder at temperature theta > 0.
    pub fn thermal(spectrum: &HamiltonianSpectrum, theta: f64) -> Result<Self> {
        check_pos("theta", theta)?;
        Ok(Self::from_diagonal(&gibbs_populations(spectrum.energies(), theta))
            .expect("Gibbs populations are a valid state"))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Spectrum of the state, sorted descending.
    pub fn eigenvalues_descending(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn diagonal_populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Tr(rho H) for the diagonal ladder.
    pub fn mean_energy(&self, h: &HamiltonianSpectrum) -> Result<f64> {
        check_dims(self, h)?;
        Ok(self
            .diagonal_populations()
            .iter()
            .zip(h.energies())
            .map(|(p, e)| p * e)
            .sum())
    }

    /// -Sum r ln r over the state spectrum, in nats.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|&&r| r > 1e-300)
            .map(|&r| -r * r.ln())
            .sum()
    }
}

fn check_dims(rho: &DensityMatrix, h: &HamiltonianSpectrum) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: state has {} levels, spectrum {}",
            rho.dim(),
            h.dim()
        )));
    }
    Ok(())
}

pub(crate) fn gibbs_populations(energies: &[f64], theta: f64) -> Vec<f64> {
    let e0 = energies[0];
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - e0) / theta).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// Clip the -1e-12..0 validation band to zero and renormalize.
fn clipped_spectrum(rho: &DensityMatrix) -> Vec<f64> {
    let mut r: Vec<f64> = rho
        .eigenvalues_descending()
        .iter()
        .map(|&v| v.max(0.0))
        .collect();
    let total: f64 = r.iter().sum();
    for v in &mut r {
        *v /= total;
    }
    r
}

/// Work extractable by the best unitary: Tr(rho H) minus the energy of the
/// passive rearrangement (state eigenvalues descending against energies
/// ascending).
pub fn ergotropy(rho: &DensityMatrix, h: &HamiltonianSpectrum) -> Result<f64> {
    check_dims(rho, h)?;
    let r = clipped_spectrum(rho);
    let passive_energy: f64 = r.iter().zip(h.energies()).map(|(ri, ei)| ri * ei).sum();
    Ok((rho.mean_energy(h)? - passive_energy).max(0.0))
}

/// The zero-ergotropy endpoint: diagonal in the energy basis with
/// populations non-increasing up the ladder.
pub fn passive_state(rho: &DensityMatrix, h: &HamiltonianSpectrum) -> Result<DensityMatrix> {
    check_dims(rho, h)?;
    DensityMatrix::from_diagonal(&clipped_spectrum(rho))
}

/// First and second quadrature moments of a Gaussian state, symmetric
/// ordering (vacuum variance 1/2 per quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStateSummary {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl GaussianStateSummary {
    pub fn new(mean_x: f64, mean_p: f64, var_x: f64, var_p: f64) -> Result<Self> {
        for (name, v) in [
            ("mean_x", mean_x),
            ("mean_p", mean_p),
            ("var_x", var_x),
            ("var_p", var_p),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        // vacuum floor, with slack for moment estimates
        for (name, v) in [("var_x", var_x), ("var_p", var_p)] {
            if v < 0.5 - 1e-9 {
                return Err(Error::invalid(format!(
                    "{name} = {v} is below the vacuum floor 1/2"
                )));
            }
        }
        Ok(Self {
            mean_x,
            mean_p,
            var_x,
            var_p,
        })
    }
}

/// Work recovered by displacing the state back to the phase-space origin,
/// (mean_x^2 + mean_p^2)/2. For Gaussian states this captures the bulk of
/// the ergotropy; squeezing corrections are not included.
pub fn displacement_ergotropy(summary: &GaussianStateSummary) -> f64 {
    (summary.mean_x * summary.mean_x + summary.mean_p * summary.mean_p) / 2.0
}
