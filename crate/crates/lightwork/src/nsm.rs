//! Non-selective measurement (NSM) as a work resource: on a split thermal
//! beam it does nothing (the outcome-averaged transmitted ensemble stays
//! thermal), but on a driven few-level cycle it injects heat and coherence
//! that a suitable efficiency bound must account for.
//!
//! Cycle bookkeeping, all in the energy eigenbasis: quench the ladder from
//! E(i) to E(f) at fixed populations (work W_I), measure non-selectively
//! (heat Q_M enters through the population shuffle T), quench back (work
//! W_II), and rethermalize. The bound eta_max corrects Carnot by the
//! ergotropy-like excess Delta W of the post-measurement state over the
//! thermal state of equal entropy.

use crate::ergotropy::{
    gibbs_populations, C64, DensityMatrix, GaussianStateSummary, HamiltonianSpectrum, MAX_DIM,
};
use crate::error::{check_pos, Error, Result};
use crate::mc::{poisson_draw, run_streams, sample_thermal_alpha, McEstimate, Welford};
use crate::numeric::bisect;
use crate::photocount::check_kappa_sq;
use crate::coarse::quadrant_probabilities;
use nalgebra::DMatrix;
use rand::Rng;

const COMPLETENESS_TOL: f64 = 1e-10;

/// A complete set of measurement (Kraus) operators in the energy basis.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<DMatrix<C64>>,
    dim: usize,
}

impl KrausSet {
    pub fn new(operators: Vec<DMatrix<C64>>) -> Result<Self> {
        let dim = match operators.first() {
            Some(op) => op.nrows(),
            None => return Err(Error::invalid("a Kraus set needs at least one operator")),
        };
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid(format!(
                "Kraus operators must have 1..={MAX_DIM} levels, got {dim}"
            )));
        }
        if operators
            .iter()
            .any(|op| op.nrows() != dim || op.ncols() != dim)
        {
            return Err(Error::invalid("Kraus operators must all be square, same size"));
        }
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for op in &operators {
            sum += op.adjoint() * op;
        }
        let mut dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                dev = dev.max((sum[(i, j)] - target).norm());
            }
        }
        if dev > COMPLETENESS_TOL {
            return Err(Error::invalid(format!(
                "Kraus set is not complete: deviation {dev:.3e} from identity"
            )));
        }
        Ok(Self { operators, dim })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_projector_basis(basis: &DMatrix<C64>) -> Result<Self> {
        let d = basis.nrows();
        let ops = (0..d)
            .map(|j| {
                let col = basis.column(j);
                DMatrix::from_fn(d, d, |m, n| col[m] * col[n].conj())
            })
            .collect();
        Self::new(ops)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.operators
    }

    /// Non-selective application: Sum_j M_j rho M_j†.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: state {} vs Kraus {}",
                rho.dim(),
                self.dim
            )));
        }
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for op in &self.operators {
            out += op * rho.matrix() * op.adjoint();
        }
        // symmetrize away accumulation round-off before re-validation
        let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
        DensityMatrix::new(out)
    }
}

/// Population shuffle of the non-selective measurement,
/// T[m][n] = Sum_j |<m|M_j|n>|^2. Column-stochastic by completeness;
/// doubly stochastic when the set is projective.
pub fn transition_matrix(kraus: &KrausSet) -> DMatrix<f64> {
    let d = kraus.dim();
    DMatrix::from_fn(d, d, |m, n| {
        kraus
            .operators()
            .iter()
            .map(|op| op[(m, n)].norm_sqr())
            .sum()
    })
}

/// Everything the four-stroke NSM cycle produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    /// Work invested raising the ladder at frozen populations.
    pub w_i: f64,
    /// Work during the return quench at post-measurement populations.
    pub w_ii: f64,
    /// Heat injected by the measurement at the raised ladder.
    pub q_m: f64,
    /// Engine efficiency -(W_I + W_II)/Q_M; None when the cycle is not
    /// driven (Q_M <= 0).
    pub eta: Option<f64>,
    pub p_nsm: Vec<f64>,
    pub rho_nsm: DensityMatrix,
    pub s_von_neumann: f64,
    /// Temperature whose thermal state on the raised ladder matches the
    /// post-measurement entropy; infinite when that entropy sits at the
    /// maximally mixed ceiling, with the flag below cleared.
    pub theta_prime: f64,
    pub theta_prime_finite: bool,
    /// Energy of the post-measurement state above the entropy-matched
    /// thermal reference.
    pub delta_w_bound: f64,
    /// Carnot corrected by the measurement's extractable excess,
    /// 1 - (theta_c/theta_m) Q_M/(Q_M + Delta W). None when not driven.
    pub eta_max: Option<f64>,
    pub transition: DMatrix<f64>,
}

impl CycleReport {
    pub fn is_driven(&self) -> bool {
        self.q_m > 0.0
    }
}

fn thermal_entropy(energies: &[f64], theta: f64) -> f64 {
    gibbs_populations(energies, theta)
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

fn thermal_energy(energies: &[f64], theta: f64) -> f64 {
    gibbs_populations(energies, theta)
        .into_iter()
        .zip(energies)
        .map(|(p, e)| p * e)
        .sum()
}

/// Four-stroke cycle driven by a non-selective measurement.
///
/// `p_eq` is taken as given (normalized, nonnegative); for the physical
/// cycle it should be the Gibbs populations of `h_i` at the hot
/// temperature `theta_m`.
pub fn nsm_cycle(
    h_i: &HamiltonianSpectrum,
    h_f: &HamiltonianSpectrum,
    p_eq: &[f64],
    kraus: &KrausSet,
    theta_c: f64,
    theta_m: f64,
) -> Result<CycleReport> {
    let d = h_i.dim();
    if h_f.dim() != d || kraus.dim() != d || p_eq.len() != d {
        return Err(Error::invalid(format!(
            "dimension mismatch: ladders {}/{}, Kraus {}, populations {}",
            d,
            h_f.dim(),
            kraus.dim(),
            p_eq.len()
        )));
    }
    check_pos("theta_c", theta_c)?;
    check_pos("theta_m", theta_m)?;
    if p_eq.iter().any(|&p| p < -1e-12) {
        return Err(Error::invalid("equilibrium populations must be nonnegative"));
    }
    let norm: f64 = p_eq.iter().sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!(
            "equilibrium populations must sum to 1, got {norm}"
        )));
    }

    let e_i = h_i.energies();
    let e_f = h_f.energies();
    let w_i: f64 = p_eq
        .iter()
        .zip(e_f.iter().zip(e_i))
        .map(|(p, (ef, ei))| p * (ef - ei))
        .sum();

    let transition = transition_matrix(kraus);
    let p_nsm: Vec<f64> = (0..d)
        .map(|m| (0..d).map(|n| transition[(m, n)] * p_eq[n]).sum())
        .collect();
    let q_m: f64 = p_nsm
        .iter()
        .zip(p_eq)
        .zip(e_f)
        .map(|((pn, pe), ef)| (pn - pe) * ef)
        .sum();
    let w_ii: f64 = p_nsm
        .iter()
        .zip(e_i.iter().zip(e_f))
        .map(|(p, (ei, ef))| p * (ei - ef))
        .sum();
    let driven = q_m > 0.0;
    let eta = driven.then(|| -(w_i + w_ii) / q_m);

    let rho_eq = DensityMatrix::from_diagonal(p_eq)?;
    let rho_nsm = kraus.apply(&rho_eq)?;
    let s_vn = rho_nsm.von_neumann_entropy();
    let e_nsm = rho_nsm.mean_energy(h_f)?;

    let ln_d = (d as f64).ln();
    let (theta_prime, theta_prime_finite, e_ref) = if s_vn >= ln_d - 1e-12 {
        // maximally mixed: the entropy-matched reference is the
        // infinite-temperature state
        (f64::INFINITY, false, e_f.iter().sum::<f64>() / d as f64)
    } else {
        let scale = e_f[d - 1] - e_f[0];
        if scale <= 0.0 {
            return Err(Error::NotBracketed {
                context: "entropy-matching temperature (flat ladder)",
                lo: 0.0,
                hi: 0.0,
            });
        }
        let mut lo = scale;
        while thermal_entropy(e_f, lo) >= s_vn {
            lo /= 4.0;
            if lo < 1e-280 {
                return Err(Error::NotBracketed {
                    context: "entropy-matching temperature",
                    lo,
                    hi: scale,
                });
            }
        }
        let mut hi = lo;
        while thermal_entropy(e_f, hi) <= s_vn {
            hi *= 4.0;
            if hi > 1e280 {
                return Err(Error::NotBracketed {
                    context: "entropy-matching temperature",
                    lo,
                    hi,
                });
            }
        }
        let root = bisect(
            "entropy-matching temperature",
            |theta| thermal_entropy(e_f, theta) - s_vn,
            lo,
            hi,
        )?;
        (root, true, thermal_energy(e_f, root))
    };
    // thermal states minimize energy at fixed entropy, so this is >= 0
    let delta_w_bound = (e_nsm - e_ref).max(0.0);
    let eta_max = driven.then(|| 1.0 - (theta_c / theta_m) * q_m / (q_m + delta_w_bound));

    Ok(CycleReport {
        w_i,
        w_ii,
        q_m,
        eta,
        p_nsm,
        rho_nsm,
        s_von_neumann: s_vn,
        theta_prime,
        theta_prime_finite,
        delta_w_bound,
        eta_max,
        transition,
    })
}

/// Outcome families for the no-go check on the split thermal beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PovmFamily {
    /// Photocount of the reflected beam.
    Photocount,
    /// Two-bit sign record of the eight-port layout with oscillator
    /// amplitude beta.
    Sign { beta: f64 },
    /// Single trivial outcome.
    Identity,
}

impl PovmFamily {
    /// Largest deviation of Sum_i p(i|alpha) from 1 over a deterministic
    /// probe set scaled to the input occupation.
    fn completeness_deviation(&self, nbar: f64, kappa_sq: f64) -> f64 {
        let sd = nbar.sqrt().max(1.0);
        let probes = [
            (0.0, 0.0),
            (sd, sd),
            (sd, -sd),
            (-sd, sd),
            (-sd, -sd),
            (3.0 * sd, -2.0 * sd),
            (0.3 * sd, 0.0),
        ];
        let mut dev = 0.0f64;
        for (x, p) in probes {
            let total = match *self {
                PovmFamily::Identity => 1.0,
                PovmFamily::Sign { beta } => {
                    let xi = 2.0 * beta * beta;
                    quadrant_probabilities(x, p, xi, 1.0 - kappa_sq)
                        .iter()
                        .sum()
                }
                PovmFamily::Photocount => {
                    let lambda = (1.0 - kappa_sq) * (x * x + p * p) / 2.0;
                    if lambda == 0.0 {
                        1.0
                    } else {
                        // sum the Poisson mass far past the bulk
                        let cap = (lambda + 20.0 * lambda.sqrt() + 60.0) as u64;
                        let mut term = (-lambda).exp();
                        let mut total = term;
                        for m in 1..=cap {
                            term *= lambda / m as f64;
                            total += term;
                        }
                        total
                    }
                }
            };
            dev = dev.max((total - 1.0).abs());
        }
        dev
    }

    fn sample_outcome<R: Rng + ?Sized>(
        &self,
        x: f64,
        p: f64,
        kappa_sq: f64,
        rng: &mut R,
    ) -> u32 {
        match *self {
            PovmFamily::Identity => 0,
            PovmFamily::Photocount => {
                let lambda = (1.0 - kappa_sq) * (x * x + p * p) / 2.0;
                poisson_draw(lambda, rng) as u32
            }
            PovmFamily::Sign { beta } => {
                let xi = 2.0 * beta * beta;
                let q = quadrant_probabilities(x, p, xi, 1.0 - kappa_sq);
                let u: f64 = rng.random();
                let mut cum = 0.0;
                for (i, &qi) in q.iter().enumerate() {
                    cum += qi;
                    if u < cum {
                        return i as u32;
                    }
                }
                3
            }
        }
    }
}

/// Transmitted-ensemble statistics after outcome-averaged measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct NoGoReport {
    pub mean_x: McEstimate,
    pub mean_p: McEstimate,
    pub second_moment_x: McEstimate,
    pub second_moment_p: McEstimate,
    /// Per-quadrature second moment of the thermal reference (kappa^2 nbar
    /// in the phase-space convention used by the sampler).
    pub expected_second_moment: f64,
    /// Pair-product estimate of (mean_x^2 + mean_p^2)/2; zero when no work
    /// was stored by the measurement.
    pub displacement_ergotropy: McEstimate,
    pub completeness_deviation: f64,
}

impl NoGoReport {
    /// All four moments within `z` standard errors of the thermal values.
    pub fn moments_consistent(&self, z: f64) -> bool {
        self.mean_x.z_score(0.0).abs() < z
            && self.mean_p.z_score(0.0).abs() < z
            && self.second_moment_x.z_score(self.expected_second_moment).abs() < z
            && self.second_moment_p.z_score(self.expected_second_moment).abs() < z
    }

    /// Moments packaged as a physical Gaussian summary (symmetric-ordering
    /// variances: phase-space second moment plus the vacuum half).
    pub fn summary(&self) -> Result<GaussianStateSummary> {
        GaussianStateSummary::new(
            self.mean_x.mean,
            self.mean_p.mean,
            self.second_moment_x.mean - self.mean_x.mean.powi(2) + 0.5,
            self.second_moment_p.mean - self.mean_p.mean.powi(2) + 0.5,
        )
    }
}

/// Sample the split-measure-average chain and report whether the
/// transmitted ensemble still looks thermal. The outcome of the POVM is
/// drawn (exercising p(i|alpha)) and then deliberately discarded: that is
/// the non-selective average.
pub fn nsm_no_go_check(
    nbar: f64,
    kappa_sq: f64,
    povm: &PovmFamily,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<NoGoReport> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    if let PovmFamily::Sign { beta } = povm {
        if !(beta.is_finite() && *beta >= 0.0) {
            return Err(Error::NonNegative {
                name: "beta",
                value: *beta,
            });
        }
    }
    let deviation = povm.completeness_deviation(nbar, kappa_sq);
    if deviation > COMPLETENESS_TOL {
        return Err(Error::invalid(format!(
            "POVM fails completeness on probe points: deviation {deviation:.3e}"
        )));
    }

    #[derive(Clone, Copy, Default)]
    struct Acc {
        x: Welford,
        p: Welford,
        xx: Welford,
        pp: Welford,
        pair: Welford,
    }
    let kappa = kappa_sq.sqrt();
    let parts = run_streams(n_samples, seed, workers, |rng, len| {
        let mut acc = Acc::default();
        let mut held: Option<(f64, f64)> = None;
        for _ in 0..len {
            let (x, p) = sample_thermal_alpha(nbar, rng);
            let _outcome = povm.sample_outcome(x, p, kappa_sq, rng);
            let (tx, tp) = (kappa * x, kappa * p);
            acc.x.push(tx);
            acc.p.push(tp);
            acc.xx.push(tx * tx);
            acc.pp.push(tp * tp);
            match held.take() {
                None => held = Some((tx, tp)),
                Some((ux, up)) => acc.pair.push((ux * tx + up * tp) / 2.0),
            }
        }
        acc
    })?;
    let total = parts.into_iter().fold(Acc::default(), |a, b| Acc {
        x: a.x.merge(b.x),
        p: a.p.merge(b.p),
        xx: a.xx.merge(b.xx),
        pp: a.pp.merge(b.pp),
        pair: a.pair.merge(b.pair),
    });
    Ok(NoGoReport {
        mean_x: total.x.estimate(),
        mean_p: total.p.estimate(),
        second_moment_x: total.xx.estimate(),
        second_moment_p: total.pp.estimate(),
        expected_second_moment: kappa_sq * nbar,
        displacement_ergotropy: total.pair.estimate(),
        completeness_deviation: deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergotropy::{displacement_ergotropy, ergotropy};
    use approx::assert_relative_eq;

    fn rot01(t: f64) -> DMatrix<C64> {
        let (c, s) = (t.cos(), t.sin());
        DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(c, 0.0),
                C64::new(-s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(c, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        )
    }

    fn rot12(t: f64) -> DMatrix<C64> {
        let (c, s) = (t.cos(), t.sin());
        DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(c, 0.0),
                C64::new(-s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(c, 0.0),
            ],
        )
    }

    fn qutrit_fixture() -> (HamiltonianSpectrum, HamiltonianSpectrum, Vec<f64>, KrausSet) {
        let h_i = HamiltonianSpectrum::new(vec![0.0, 0.4, 1.0]).unwrap();
        let h_f = HamiltonianSpectrum::new(vec![0.0, 1.2, 3.0]).unwrap();
        let p_eq = gibbs_populations(h_i.energies(), 1.0);
        let kraus = KrausSet::from_projector_basis(&(rot01(0.7) * rot12(0.9))).unwrap();
        (h_i, h_f, p_eq, kraus)
    }

    #[test]
    fn energy_basis_measurement_is_no_engine() {
        let h_i = HamiltonianSpectrum::new(vec![0.0, 0.4, 1.0]).unwrap();
        let h_f = HamiltonianSpectrum::new(vec![0.0, 0.8, 2.0]).unwrap();
        let p_eq = gibbs_populations(h_i.energies(), 1.0);
        let kraus = KrausSet::from_projector_basis(&DMatrix::identity(3, 3)).unwrap();
        let report = nsm_cycle(&h_i, &h_f, &p_eq, &kraus, 0.3, 1.0).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert_relative_eq!(report.transition[(m, n)], expect, epsilon = 1e-15);
            }
        }
        assert!(report.q_m.abs() < 1e-15);
        assert!(!report.is_driven());
        assert!(report.eta.is_none());
        assert!((report.w_i + report.w_ii).abs() < 1e-15);
    }

    #[test]
    fn qubit_x_basis_fixture() {
        let (e_i, e_f) = (0.5, 1.2);
        let h_i = HamiltonianSpectrum::new(vec![0.0, e_i]).unwrap();
        let h_f = HamiltonianSpectrum::new(vec![0.0, e_f]).unwrap();
        let p_eq = gibbs_populations(h_i.energies(), 1.0);
        let p_e = p_eq[1];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
            ],
        );
        let kraus = KrausSet::from_projector_basis(&basis).unwrap();
        let report = nsm_cycle(&h_i, &h_f, &p_eq, &kraus, 0.3, 1.0).unwrap();
        for m in 0..2 {
            for n in 0..2 {
                assert_relative_eq!(report.transition[(m, n)], 0.5, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(report.p_nsm[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(report.q_m, e_f * (0.5 - p_e), max_relative = 1e-12);
        assert_relative_eq!(
            report.w_i + report.w_ii,
            -(e_f - e_i) * (0.5 - p_e),
            max_relative = 1e-12
        );
        assert_relative_eq!(report.eta.unwrap(), 1.0 - e_i / e_f, max_relative = 1e-12);
        // the averaged state is maximally mixed: no extractable excess
        assert_relative_eq!(report.s_von_neumann, 2f64.ln(), epsilon = 1e-12);
        assert!(!report.theta_prime_finite);
        assert!(report.delta_w_bound.abs() < 1e-12);
        assert_relative_eq!(report.eta_max.unwrap(), 1.0 - 0.3, max_relative = 1e-12);
    }

    #[test]
    fn qutrit_rotated_basis_fixture() {
        let (h_i, h_f, p_eq, kraus) = qutrit_fixture();
        assert_relative_eq!(p_eq[0], 0.490629109798417, max_relative = 1e-12);
        assert_relative_eq!(p_eq[1], 0.328878527466499, max_relative = 1e-12);
        assert_relative_eq!(p_eq[2], 0.180492362735084, max_relative = 1e-12);

        let report = nsm_cycle(&h_i, &h_f, &p_eq, &kraus, 0.3, 1.0).unwrap();
        let t = &report.transition;
        assert_relative_eq!(t[(0, 0)], 0.432770644236089, max_relative = 1e-10);
        assert_relative_eq!(t[(0, 1)], 0.370432879821681, max_relative = 1e-10);
        assert_relative_eq!(t[(0, 2)], 0.196796475942231, max_relative = 1e-10);
        assert_relative_eq!(t[(1, 1)], 0.352173992037013, max_relative = 1e-10);
        assert_relative_eq!(t[(1, 2)], 0.277393128141306, max_relative = 1e-10);
        assert_relative_eq!(t[(2, 2)], 0.525810395916463, max_relative = 1e-10);
        // rank-one projectors give a symmetric shuffle
        for m in 0..3 {
            let row: f64 = (0..3).map(|n| t[(m, n)]).sum();
            let col: f64 = (0..3).map(|n| t[(n, m)]).sum();
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
            for n in 0..3 {
                assert_relative_eq!(t[(m, n)], t[(n, m)], epsilon = 1e-14);
            }
        }

        assert_relative_eq!(report.p_nsm[0], 0.36967755689012, max_relative = 1e-10);
        assert_relative_eq!(report.p_nsm[1], 0.347634959084807, max_relative = 1e-10);
        assert_relative_eq!(report.p_nsm[2], 0.282687484025073, max_relative = 1e-10);
        let sum: f64 = report.p_nsm.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);

        assert_relative_eq!(report.w_i, 0.624087547443, max_relative = 1e-9);
        assert_relative_eq!(report.q_m, 0.329093081812, max_relative = 1e-9);
        assert_relative_eq!(report.w_ii, -0.843482935318, max_relative = 1e-9);
        // the ladder triples uniformly, so eta collapses to 1 - 1/3
        assert_relative_eq!(report.eta.unwrap(), 2.0 / 3.0, max_relative = 1e-12);

        assert_relative_eq!(report.s_von_neumann, 1.078913974702, max_relative = 1e-9);
        let p_entropy: f64 = p_eq.iter().map(|&p| -p * p.ln()).sum();
        assert!(report.s_von_neumann >= p_entropy);
        assert!(report.theta_prime_finite);
        assert_relative_eq!(report.theta_prime, 6.064676018840, max_relative = 1e-8);
        assert_relative_eq!(report.delta_w_bound, 0.107363162529, max_relative = 1e-8);

        let eigs = report.rho_nsm.eigenvalues_descending();
        assert_relative_eq!(eigs[0], 0.423499960803161, max_relative = 1e-9);
        assert_relative_eq!(eigs[1], 0.312732784956988, max_relative = 1e-9);
        assert_relative_eq!(eigs[2], 0.263767254239851, max_relative = 1e-9);

        let exact = ergotropy(&report.rho_nsm, &h_f).unwrap();
        assert_relative_eq!(exact, 0.098643298309, max_relative = 1e-9);
        assert!(report.delta_w_bound >= exact);

        // the ergotropy correction lifts the bound above Carnot
        let carnot = 1.0 - 0.3;
        assert_relative_eq!(report.eta_max.unwrap(), 0.773796512655, max_relative = 1e-9);
        assert!(report.eta_max.unwrap() > carnot);
        assert!(report.eta.unwrap() < report.eta_max.unwrap());
    }

    #[test]
    fn random_projective_instances_respect_bounds() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let mut e_i: Vec<f64> = (0..3).map(|_| 2.0 * rng.random::<f64>()).collect();
            e_i.sort_by(f64::total_cmp);
            let mut e_f: Vec<f64> = (0..3).map(|_| 4.0 * rng.random::<f64>()).collect();
            e_f.sort_by(f64::total_cmp);
            if e_f[2] - e_f[0] < 1e-3 {
                e_f[2] += 1.0;
            }
            let h_i = HamiltonianSpectrum::new(e_i).unwrap();
            let h_f = HamiltonianSpectrum::new(e_f).unwrap();
            let theta_m = 0.5 + rng.random::<f64>();
            let p_eq = gibbs_populations(h_i.energies(), theta_m);
            let g = DMatrix::from_fn(3, 3, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let kraus = KrausSet::from_projector_basis(&g.qr().q()).unwrap();
            let report = nsm_cycle(&h_i, &h_f, &p_eq, &kraus, 0.2, theta_m).unwrap();

            let t = &report.transition;
            for m in 0..3 {
                let row: f64 = (0..3).map(|n| t[(m, n)]).sum();
                let col: f64 = (0..3).map(|n| t[(n, m)]).sum();
                assert!((row - 1.0).abs() < 1e-10, "row sum {row}");
                assert!((col - 1.0).abs() < 1e-10, "col sum {col}");
            }
            let sum: f64 = report.p_nsm.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(report.q_m > -1e-12, "projective NSM cannot cool: {}", report.q_m);
            let p_entropy: f64 = p_eq.iter().map(|&p| -p * p.ln()).sum();
            assert!(report.s_von_neumann >= p_entropy - 1e-12);
            let exact = ergotropy(&report.rho_nsm, &h_f).unwrap();
            assert!(
                report.delta_w_bound >= exact - 1e-10,
                "bound {} vs ergotropy {exact}",
                report.delta_w_bound
            );
        }
    }

    #[test]
    fn kraus_validation() {
        let half = DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0));
        assert!(KrausSet::new(vec![half.clone()]).is_err());
        assert!(KrausSet::new(vec![]).is_err());
        let id = DMatrix::identity(2, 2);
        let set = KrausSet::new(vec![id]).unwrap();
        assert_eq!(set.dim(), 2);
        // non-projective but complete: sqrt(1/2) I twice
        let root_half = DMatrix::from_diagonal_element(2, 2, C64::new(0.5f64.sqrt(), 0.0));
        assert!(KrausSet::new(vec![root_half.clone(), root_half]).is_ok());
    }

    #[test]
    fn no_go_all_families() {
        let (nbar, ksq) = (20.0, 0.9);
        let n = 200_000;
        for povm in [
            PovmFamily::Photocount,
            PovmFamily::Sign { beta: 2.0 },
            PovmFamily::Identity,
        ] {
            let report = nsm_no_go_check(nbar, ksq, &povm, n, 4242, 4).unwrap();
            assert!(report.completeness_deviation < 1e-10);
            assert!(
                report.moments_consistent(4.0),
                "{povm:?}: means ({}, {}), second moments ({}, {}) vs {}",
                report.mean_x.mean,
                report.mean_p.mean,
                report.second_moment_x.mean,
                report.second_moment_p.mean,
                report.expected_second_moment
            );
            let z = report.displacement_ergotropy.z_score(0.0);
            assert!(z.abs() < 4.0, "{povm:?}: stored work z = {z}");
            let summary = report.summary().unwrap();
            assert!(displacement_ergotropy(&summary) < 1e-3 * nbar);
        }
    }

    #[test]
    fn no_go_is_deterministic() {
        let povm = PovmFamily::Sign { beta: 1.5 };
        let a = nsm_no_go_check(10.0, 0.8, &povm, 50_000, 5, 1).unwrap();
        let b = nsm_no_go_check(10.0, 0.8, &povm, 50_000, 5, 3).unwrap();
        assert_eq!(a.mean_x.mean.to_bits(), b.mean_x.mean.to_bits());
        assert_eq!(
            a.displacement_ergotropy.mean.to_bits(),
            b.displacement_ergotropy.mean.to_bits()
        );
    }
}
