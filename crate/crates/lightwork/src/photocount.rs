//! Work extraction conditioned on photocounting a reflected fraction.
//!
//! A beam splitter taps off a fraction R = 1 - kappa^2 of a thermal mode and
//! the tap is photodetected. Detecting m quanta leaves the transmitted beam in
//! the conditional Fock-diagonal state
//!
//!   p(n|m) = C(n+m, m) kappa^{2n} nbar^n (R nbar + 1)^{m+1} / (nbar + 1)^{n+m+1},
//!
//! which is non-passive for m >= 1: reordering its populations against the
//! energy ladder (the passivizing permutation) releases work. The record
//! itself is geometrically distributed with mean R nbar.
//!
//! Everything is evaluated in log space through log-gamma; a Stirling-formula
//! variant of the binomial weight is kept as an independent cross-check of the
//! large-argument regime.

use crate::error::{check_nonneg, check_pos, Error, Result};
use crate::numeric::NeumaierSum;
use crate::thermo::entropy_raw;
use statrs::function::gamma::ln_gamma;

/// Truncation-mass contract for adaptive Fock cutoffs.
const MASS_TOL: f64 = 1e-9;

/// Beam-splitter tap shared by the photocount and homodyne schemes.
/// `beta` is the local-oscillator quadrature amplitude; photocounting
/// ignores it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterTap {
    kappa_sq: f64,
    beta: f64,
}

impl SplitterTap {
    pub fn new(kappa_sq: f64, beta: f64) -> Result<Self> {
        check_kappa_sq(kappa_sq)?;
        check_nonneg("beta", beta)?;
        Ok(Self { kappa_sq, beta })
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Reflected fraction R = 1 - kappa^2.
    pub fn reflectivity(&self) -> f64 {
        1.0 - self.kappa_sq
    }
}

pub(crate) fn check_kappa_sq(kappa_sq: f64) -> Result<f64> {
    if kappa_sq.is_finite() && kappa_sq > 0.0 && kappa_sq <= 1.0 {
        Ok(kappa_sq)
    } else {
        Err(Error::OutOfRange {
            name: "kappa_sq",
            value: kappa_sq,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Probability of counting `m` quanta in the reflected beam: geometric with
/// mean R nbar, i.e. the reflected beam is itself thermal.
pub fn reflected_count_distribution(nbar: f64, kappa_sq: f64, m: u32) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let rn = (1.0 - kappa_sq) * nbar;
    if rn == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    // log space: (R nbar)^m overflows as a literal power already at m ~ 300.
    Ok((f64::from(m) * rn.ln() - f64::from(m + 1) * rn.ln_1p()).exp())
}

/// Transmitted state conditioned on a photocount outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalFockState {
    probs: Vec<f64>,
    outcome_m: u32,
    nbar_in: f64,
    kappa_sq: f64,
    truncation_mass: f64,
}

impl ConditionalFockState {
    /// Populations p(n|m) for n = 0..=n_cut.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outcome_m(&self) -> u32 {
        self.outcome_m
    }

    pub fn nbar_in(&self) -> f64 {
        self.nbar_in
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    /// Probability mass lost to the cutoff, 1 - sum(probs).
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Mean occupation of the truncated vector.
    pub fn mean_occupation(&self) -> f64 {
        let mut s = NeumaierSum::new();
        for (n, &p) in self.probs.iter().enumerate() {
            s.add(n as f64 * p);
        }
        s.value()
    }
}

fn conditional_log_prob(nbar: f64, kappa_sq: f64, m: u32, n: usize) -> f64 {
    let r = 1.0 - kappa_sq;
    let mf = f64::from(m);
    let nf = n as f64;
    let ln_binom = ln_gamma(nf + mf + 1.0) - ln_gamma(mf + 1.0) - ln_gamma(nf + 1.0);
    ln_binom + nf * (kappa_sq * nbar).ln() + (mf + 1.0) * (r * nbar).ln_1p()
        - (nf + mf + 1.0) * nbar.ln_1p()
}

fn build_conditional(
    nbar: f64,
    kappa_sq: f64,
    m: u32,
    n_cut: usize,
    log_prob: impl Fn(usize) -> f64,
) -> ConditionalFockState {
    let mut probs = Vec::with_capacity(n_cut + 1);
    let mut mass = NeumaierSum::new();
    for n in 0..=n_cut {
        let p = log_prob(n).exp();
        probs.push(p);
        mass.add(p);
    }
    ConditionalFockState {
        probs,
        outcome_m: m,
        nbar_in: nbar,
        kappa_sq,
        truncation_mass: 1.0 - mass.value(),
    }
}

fn conditional_with(
    nbar: f64,
    kappa_sq: f64,
    m: u32,
    n_cut: Option<usize>,
    mass_tol: f64,
    log_prob: &dyn Fn(usize) -> f64,
) -> Result<ConditionalFockState> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    if let Some(cut) = n_cut {
        let state = build_conditional(nbar, kappa_sq, m, cut, log_prob);
        if state.truncation_mass >= mass_tol {
            return Err(Error::NoConvergence {
                context: "conditional Fock truncation",
                iterations: cut,
                residual: state.truncation_mass,
            });
        }
        return Ok(state);
    }
    // Geometric-tail decay rate kappa^2 nbar / (nbar + 1) < 1 guarantees the
    // doubling search terminates.
    let mut cut = 64usize.max(8 * (m as usize + 1));
    for _ in 0..32 {
        let state = build_conditional(nbar, kappa_sq, m, cut, log_prob);
        if state.truncation_mass < mass_tol {
            return Ok(state);
        }
        cut *= 2;
    }
    Err(Error::NoConvergence {
        context: "conditional Fock truncation",
        iterations: cut,
        residual: f64::NAN,
    })
}

/// Conditional transmitted-state populations after counting `m` quanta.
///
/// `n_cut = None` grows the cutoff until the truncation mass is below 1e-9;
/// an explicit cutoff that fails that contract is an error.
pub fn conditional_distribution(
    nbar: f64,
    kappa_sq: f64,
    m: u32,
    n_cut: Option<usize>,
) -> Result<ConditionalFockState> {
    conditional_with(nbar, kappa_sq, m, n_cut, MASS_TOL, &|n| {
        conditional_log_prob(nbar, kappa_sq, m, n)
    })
}

/// ln k! by Stirling's formula with the 1/(12k) correction.
fn ln_factorial_stirling(k: f64) -> f64 {
    debug_assert!(k >= 1.0);
    k * k.ln() - k + 0.5 * (2.0 * std::f64::consts::PI * k).ln() + 1.0 / (12.0 * k)
}

/// Same populations with the binomial weight evaluated through Stirling's
/// formula instead of log-gamma. Validation path only: agrees with
/// [`conditional_distribution`] to better than 1e-6 relative once n, m >= 50.
///
/// The truncated 1/(12k) series biases every weight by about 1/(360 k^3), so
/// the summed mass misses 1 by O(1/(360 m^3)) even with no truncation at all.
/// The mass contract is therefore 1e-5 here, not the 1e-9 of the exact path.
pub fn conditional_distribution_stirling(
    nbar: f64,
    kappa_sq: f64,
    m: u32,
    n_cut: Option<usize>,
) -> Result<ConditionalFockState> {
    if m == 0 {
        return Err(Error::invalid(
            "Stirling path needs m >= 1 (factorial of zero outcome)".to_string(),
        ));
    }
    let r = 1.0 - kappa_sq;
    let mf = f64::from(m);
    conditional_with(nbar, kappa_sq, m, n_cut, 1e-5, &move |n| {
        let nf = n as f64;
        let ln_binom = if n == 0 {
            0.0
        } else {
            ln_factorial_stirling(nf + mf) - ln_factorial_stirling(mf) - ln_factorial_stirling(nf)
        };
        ln_binom + nf * (kappa_sq * nbar).ln() + (mf + 1.0) * (r * nbar).ln_1p()
            - (nf + mf + 1.0) * nbar.ln_1p()
    })
}

/// Mean transmitted energy after outcome `m`, in units of omega:
/// E_m = (1 + m) kappa^2 nbar / (1 + R nbar).
pub fn conditional_mean_energy(nbar: f64, kappa_sq: f64, m: u32) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let r = 1.0 - kappa_sq;
    Ok((1.0 + f64::from(m)) * kappa_sq * nbar / (1.0 + r * nbar))
}

/// Second-order coherence of the conditional state, g2(0) = 1 + 1/(1 + m).
/// Independent of nbar and kappa_sq.
pub fn g2_zero(m: u32) -> f64 {
    1.0 + 1.0 / (1.0 + f64::from(m))
}

/// g2(0) by direct summation over the conditional populations; must agree
/// with the closed form. Kept as an independent code path.
pub fn g2_zero_direct(nbar: f64, kappa_sq: f64, m: u32) -> Result<f64> {
    let state = conditional_distribution(nbar, kappa_sq, m, None)?;
    let mut n1 = NeumaierSum::new();
    let mut n2 = NeumaierSum::new();
    for (n, &p) in state.probs.iter().enumerate() {
        let nf = n as f64;
        n1.add(nf * p);
        n2.add(nf * (nf - 1.0) * p);
    }
    let mean = n1.value();
    Ok(n2.value() / (mean * mean))
}

/// A Fock-diagonal state is passive iff its populations never increase with
/// energy. Ties are allowed; tiny float noise below 1e-12 of the local scale
/// is ignored.
pub fn is_passive(probs: &[f64]) -> bool {
    probs
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs())
}

/// Work released by the passivizing permutation, in units of omega:
/// the populations are sorted descending against the ladder E_n = n.
pub fn passivize_work(probs: &[f64]) -> f64 {
    let mut sorted = probs.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("populations are finite"));
    let mut w = NeumaierSum::new();
    for (n, (&p, &q)) in probs.iter().zip(&sorted).enumerate() {
        w.add(n as f64 * (p - q));
    }
    w.value()
}

/// Average permutation work over the outcome distribution, in units of omega:
/// W = sum_m p_m W_m.
///
/// W_m never exceeds the conditional energy E_m = (1 + m) c with
/// c = kappa^2 nbar / (1 + R nbar), and the record is geometric, so the
/// unaccumulated work is bounded by the analytic tail
/// sum_{m > M} p_m E_m = c q^{M+1} ((M + 2) - (M + 1) q) / (1 - q),
/// q = R nbar / (1 + R nbar). The m-sum stops when that bound drops below
/// 1e-10 of the accumulated work.
pub fn average_work(nbar: f64, kappa_sq: f64) -> Result<f64> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let rn = (1.0 - kappa_sq) * nbar;
    let q = rn / (1.0 + rn);
    let c = kappa_sq * nbar / (1.0 + rn);
    let mut work = NeumaierSum::new();
    let mut tail = f64::INFINITY;
    for m in 0..200_000u32 {
        let pm = reflected_count_distribution(nbar, kappa_sq, m)?;
        let state = conditional_distribution(nbar, kappa_sq, m, None)?;
        work.add(pm * passivize_work(state.probs()));
        let mf = f64::from(m);
        tail = c * q.powf(mf + 1.0) * ((mf + 2.0) - (mf + 1.0) * q) / (1.0 - q);
        if m >= 8 && tail <= 1e-10 * work.value().max(1e-300) {
            return Ok(work.value());
        }
    }
    Err(Error::NoConvergence {
        context: "average permutation work m-sum",
        iterations: 200_000,
        residual: tail,
    })
}

/// Entropy of the photocount record, I_D = -sum_m p_m ln p_m. Equals the
/// thermal entropy of the reflected mean R nbar (geometric identity).
pub fn detector_entropy_photocount(nbar: f64, kappa_sq: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    Ok(entropy_raw((1.0 - kappa_sq) * nbar))
}

/// Mutual information between the transmitted occupation and the count:
/// I = I_D - sum_n p(n) H(m | n) with p(m|n) binomial(n, R). In nats.
pub fn mutual_information_photocount(nbar: f64, kappa_sq: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let r = 1.0 - kappa_sq;
    if r == 0.0 || nbar == 0.0 {
        return Ok(0.0);
    }
    let i_d = entropy_raw(r * nbar);
    // p(n) is the total (pre-split) thermal distribution; m | n is the
    // binomial split of n quanta at the tap.
    let ln_q = nbar.ln() - nbar.ln_1p();
    let mut cond = NeumaierSum::new();
    let mut mass = NeumaierSum::new();
    let mut n = 0usize;
    loop {
        let pn = (n as f64 * ln_q - nbar.ln_1p()).exp();
        cond.add(pn * binomial_entropy(n, r));
        mass.add(pn);
        let tail = 1.0 - mass.value();
        // H(binomial) <= ln(n + 2) bounds the tail contribution.
        if tail * ((n + 2) as f64).ln() < 1e-12 {
            break;
        }
        n += 1;
        if n > 10_000_000 {
            return Err(Error::NoConvergence {
                context: "mutual information n-sum",
                iterations: n,
                residual: tail,
            });
        }
    }
    Ok(i_d - cond.value())
}

/// Shannon entropy of Binomial(n, r) in nats.
fn binomial_entropy(n: usize, r: f64) -> f64 {
    if n == 0 || r == 0.0 || r == 1.0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln_r = r.ln();
    let ln_1mr = (1.0 - r).ln();
    let ln_n_fact = ln_gamma(nf + 1.0);
    let mut h = NeumaierSum::new();
    for k in 0..=n {
        let kf = k as f64;
        let ln_p =
            ln_n_fact - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0) + kf * ln_r + (nf - kf) * ln_1mr;
        h.add(-ln_p.exp() * ln_p);
    }
    h.value()
}

/// Rectangular grid over the (x, p) phase plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseGrid {
    /// Symmetric square grid covering `half_width` in every direction.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        check_pos("half_width", half_width)?;
        if n < 2 {
            return Err(Error::invalid("grid needs at least 2 points per axis"));
        }
        Ok(Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }

    pub fn cell_area(&self) -> f64 {
        let dx = (self.x_max - self.x_min) / (self.nx - 1) as f64;
        let dp = (self.p_max - self.p_min) / (self.np - 1) as f64;
        dx * dp
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Conditional Glauber-Sudarshan weight over the grid, row-major in x.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub grid: PhaseGrid,
    /// values[ix * np + ip] = P(x_ix, p_ip | m)
    pub values: Vec<f64>,
}

impl PhaseField {
    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.grid.np + ip]
    }
}

/// Conditional P-distribution of the input mode given the count m:
///
///   P(x, p | m) = Pois(m; R |alpha|^2) exp(-(x^2+p^2)/(2 nbar)) / (2 pi nbar p_m),
///
/// with |alpha|^2 = (x^2 + p^2)/2. Normalized analytically; the grid sum
/// recovers 1 only up to quadrature error. Radially non-monotonic for m >= 1.
pub fn p_distribution_grid(
    nbar: f64,
    kappa_sq: f64,
    m: u32,
    grid: &PhaseGrid,
) -> Result<PhaseField> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let r = 1.0 - kappa_sq;
    let pm = reflected_count_distribution(nbar, kappa_sq, m)?;
    if pm == 0.0 {
        return Err(Error::invalid(format!(
            "outcome m = {m} has zero probability at kappa_sq = {kappa_sq}"
        )));
    }
    let ln_norm = (2.0 * std::f64::consts::PI * nbar).ln() + pm.ln();
    let mf = f64::from(m);
    let ln_m_fact = ln_gamma(mf + 1.0);
    let xs = grid.xs();
    let ps = grid.ps();
    let mut values = Vec::with_capacity(grid.nx * grid.np);
    for &x in &xs {
        for &p in &ps {
            let alpha_sq = 0.5 * (x * x + p * p);
            let lam = r * alpha_sq;
            let ln_pois = if lam == 0.0 && m == 0 {
                0.0
            } else if lam == 0.0 {
                f64::NEG_INFINITY
            } else {
                mf * lam.ln() - lam - ln_m_fact
            };
            values.push((ln_pois - alpha_sq / nbar - ln_norm).exp());
        }
    }
    Ok(PhaseField {
        grid: grid.clone(),
        values,
    })
}
