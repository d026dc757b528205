//! Work extraction from feedback displacement after small-fraction homodyne.
//!
//! A fraction eps = 1 - kappa^2 of the mode is split off and mixed with a
//! local oscillator of quadrature amplitude beta (xi = 2 beta^2 counts its
//! energy investment); the photocurrent differences (dn_x, dn_p) estimate the
//! input quadratures, and the estimate drives a displacement that extracts
//!
//!   W(xi, eps) = nbar (1 - eps) / (1 + 1/xi + 1/(eps nbar)) - xi
//!
//! net of the oscillator energy. Per outcome axis the joint (x, dn_x) law is
//! Gaussian with
//!
//!   Var(dn_x)    = sigma^2 = [xi + nbar eps (xi + 1)] / 2
//!   Cov(x, dn_x) = beta sqrt(eps) nbar
//!   slope        = Cov / sigma^2 = kappa / gamma   (conditional-mean gain)
//!
//! where gamma = beta sqrt(eps) [1 + 1/(nbar eps) + 1/xi]. The displaced
//! fraction, information content, and record entropy all follow from this one
//! Gaussian model.
//!
//! The optimizer profiles out xi exactly and then solves the remaining
//! one-dimensional stationarity condition by bisection, so the returned point
//! is stationary to machine precision. The simpler algebraic expressions
//! often quoted for the optimum (eps ~ 1/sqrt(nbar), xi ~ sqrt(nbar)) are
//! exposed separately as [`closed_form_params`]; they are accurate only at
//! large nbar and are kept as seeds and cross-checks, not as the optimum.

use crate::error::{check_nonneg, check_pos, check_range, Error, Result};
use crate::numeric::bisect;

/// Derived per-axis outcome statistics of the homodyne record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneStats {
    /// Per-axis variance of the count difference.
    pub sigma_dn_sq: f64,
    /// Conditional-mean denominator gamma.
    pub gamma: f64,
    /// Quadrature variance left after conditioning on the outcome.
    pub sigma_x_sq: f64,
    /// d<x>/d(dn_x) = kappa / gamma.
    pub mean_gain: f64,
}

impl HomodyneStats {
    /// Requires an operating point: nbar > 0, xi > 0, 0 < eps < 1.
    pub fn new(nbar: f64, xi: f64, epsilon: f64) -> Result<Self> {
        check_pos("nbar", nbar)?;
        check_pos("xi", xi)?;
        check_pos("epsilon", epsilon)?;
        if epsilon >= 1.0 {
            return Err(Error::OutOfRange {
                name: "epsilon",
                value: epsilon,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let beta = (xi / 2.0).sqrt();
        let kappa = (1.0 - epsilon).sqrt();
        let sigma_dn_sq = 0.5 * (xi + nbar * epsilon * (xi + 1.0));
        let gamma = beta * epsilon.sqrt() * (1.0 + 1.0 / (nbar * epsilon) + 1.0 / xi);
        // slope written as cov/var, which stays finite as beta -> 0
        let cov = beta * epsilon.sqrt() * nbar;
        let mean_gain = kappa * cov / sigma_dn_sq;
        let sigma_x_sq = nbar - cov * cov / sigma_dn_sq;
        Ok(Self {
            sigma_dn_sq,
            gamma,
            sigma_x_sq,
            mean_gain,
        })
    }
}

/// Displacement work before any costs, nbar (1-eps) / (1 + 1/xi + 1/(eps nbar)).
/// This is the term the coarse-grained and sign-measurement limits degrade.
pub fn displacement_work(nbar: f64, xi: f64, epsilon: f64) -> Result<f64> {
    check_pos("nbar", nbar)?;
    check_nonneg("xi", xi)?;
    check_range("epsilon", epsilon, 0.0, 1.0)?;
    if xi == 0.0 || epsilon == 0.0 {
        return Ok(0.0);
    }
    Ok(nbar * (1.0 - epsilon) / (1.0 + 1.0 / xi + 1.0 / (epsilon * nbar)))
}

/// Extracted work net of the local-oscillator investment,
/// W = displacement_work - xi. xi = 0 carries no information and yields 0.
pub fn gross_work(nbar: f64, xi: f64, epsilon: f64) -> Result<f64> {
    let displaced = displacement_work(nbar, xi, epsilon)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(displaced - xi)
}

/// An operating point of the (xi, eps) plane together with its net work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalParams {
    /// Local-oscillator energy xi = 2 beta^2.
    pub xi: f64,
    /// Tapped fraction eps = 1 - kappa^2.
    pub epsilon: f64,
    /// Net work at (xi, epsilon).
    pub w_max: f64,
}

impl OptimalParams {
    /// False when no positive-work operating point exists.
    pub fn operational(&self) -> bool {
        self.w_max > 0.0
    }
}

/// For fixed eps the xi-dependence is exactly maximized by
/// xi*(eps) = u (a - 1)/(u + 1), with u = eps nbar and a = sqrt(nbar - u).
fn profiled_xi(nbar: f64, u: f64) -> f64 {
    let a = (nbar - u).sqrt();
    u * (a - 1.0) / (u + 1.0)
}

/// Net work along the profiled ridge, W(u) = u (a - 1)^2 / (u + 1).
fn profiled_work(nbar: f64, u: f64) -> f64 {
    let a = (nbar - u).sqrt();
    u * (a - 1.0) * (a - 1.0) / (u + 1.0)
}

/// Maximize the net work over (xi, eps).
///
/// Along the ridge xi = xi*(eps) the stationarity condition in u = eps nbar
/// reduces to a(a - 1) = u(u + 1) with a = sqrt(nbar - u); the left side
/// falls and the right side grows, so the root on (0, nbar) is unique and
/// bracketed whenever nbar > 1. The returned point is therefore a stationary
/// point of [`gross_work`] in both variables (envelope theorem), to solver
/// precision. nbar <= 1 has no positive-work point and returns the
/// non-operational origin.
pub fn optimize(nbar: f64) -> Result<OptimalParams> {
    check_pos("nbar", nbar)?;
    if nbar <= 1.0 {
        return Ok(OptimalParams {
            xi: 0.0,
            epsilon: 0.0,
            w_max: 0.0,
        });
    }
    let g = |u: f64| {
        let a = (nbar - u).sqrt();
        a * (a - 1.0) - u * (u + 1.0)
    };
    // g(0+) = sqrt(nbar)(sqrt(nbar)-1) > 0 and g -> -nbar(nbar+1) near u = nbar.
    let u = bisect("homodyne work stationarity", g, 1e-300, nbar * (1.0 - 1e-12))?;
    Ok(OptimalParams {
        xi: profiled_xi(nbar, u),
        epsilon: u / nbar,
        w_max: profiled_work(nbar, u),
    })
}

/// Large-nbar algebraic approximation to the optimum:
/// eps0 = (sqrt(nbar - sqrt(nbar) + 1) - 1)/nbar, xi0 = xi*(eps0), and the
/// matching work value. Exactly stationary only at nbar = 1; at nbar = 4 its
/// work is ~3% below the true maximum. Useful as a seed and asymptotic check.
pub fn closed_form_params(nbar: f64) -> Result<OptimalParams> {
    check_pos("nbar", nbar)?;
    if nbar <= 1.0 {
        return Ok(OptimalParams {
            xi: 0.0,
            epsilon: 0.0,
            w_max: 0.0,
        });
    }
    let s = nbar.sqrt();
    let root = (nbar - s + 1.0).sqrt();
    let epsilon = (root - 1.0) / nbar;
    let xi = profiled_xi(nbar, epsilon * nbar);
    let w = (root - 1.0) * (root - 1.0) * (1.0 - 1.0 / s);
    Ok(OptimalParams {
        xi,
        epsilon,
        w_max: w,
    })
}

/// Squared correlation between a quadrature and its count record,
/// rho^2 = xi eps nbar / (2 sigma^2).
fn rho_sq(nbar: f64, xi: f64, epsilon: f64) -> f64 {
    let two_sigma_sq = xi + nbar * epsilon * (xi + 1.0);
    xi * epsilon * nbar / two_sigma_sq
}

/// Mutual information between the mode quadratures and the homodyne record,
/// both axes combined: I = -ln(1 - rho^2) in nats. Vanishes with either
/// coupling (xi -> 0 or eps -> 0).
pub fn mutual_information(nbar: f64, xi: f64, epsilon: f64) -> Result<f64> {
    check_pos("nbar", nbar)?;
    check_nonneg("xi", xi)?;
    check_range("epsilon", epsilon, 0.0, 1.0)?;
    if xi == 0.0 || epsilon == 0.0 {
        return Ok(0.0);
    }
    Ok(-(-rho_sq(nbar, xi, epsilon)).ln_1p())
}

/// Differential entropy of the two-axis count record,
/// I_D = 1 + ln(2 pi sigma^2) nats (half per axis).
pub fn detector_entropy(nbar: f64, xi: f64, epsilon: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_nonneg("xi", xi)?;
    check_range("epsilon", epsilon, 0.0, 1.0)?;
    let two_sigma_sq = xi + nbar * epsilon * (xi + 1.0);
    if two_sigma_sq <= 0.0 {
        return Err(Error::invalid(format!(
            "degenerate record variance at xi = {xi}, epsilon = {epsilon}"
        )));
    }
    Ok(1.0 + (std::f64::consts::PI * two_sigma_sq).ln())
}

/// Record entropy when the entire field is homodyned instead of a tapped
/// fraction: 2 sigma^2 = xi + nbar (xi + 1). At xi = sqrt(nbar) this equals
/// 1 + ln(pi (nbar sqrt(nbar) + nbar + sqrt(nbar))) identically.
pub fn entire_field_homodyne_entropy(nbar: f64, xi: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_pos("xi", xi)?;
    let two_sigma_sq = xi + nbar * (xi + 1.0);
    Ok(1.0 + (std::f64::consts::PI * two_sigma_sq).ln())
}

/// How much of the cost side to charge against the displaced work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    /// Local-oscillator energy only (the plain net work).
    LocalOscillatorOnly,
    /// Also the minimal signal-processing (feedforward) cost theta_D * I.
    WithFeedforward,
    /// Also the detector erasure heat theta_D * I_D (instead of feedforward).
    WithErasure,
}

/// Cost ledger for one operating point at detector temperature theta_d.
/// The three cost channels are kept separable; see [`CostMode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkBudget {
    nbar: f64,
    /// Displacement work before any costs.
    pub gross_work: f64,
    /// Local-oscillator investment xi.
    pub lo_cost: f64,
    /// Minimal feedforward cost, theta_d * I.
    pub feedforward_bound: f64,
    /// Heat dumped when erasing the record, theta_d * I_D.
    pub erasure_heat: f64,
}

impl WorkBudget {
    pub fn new(nbar: f64, xi: f64, epsilon: f64, theta_d: f64) -> Result<Self> {
        check_nonneg("theta_d", theta_d)?;
        let gross = displacement_work(nbar, xi, epsilon)?;
        let i = mutual_information(nbar, xi, epsilon)?;
        let i_d = detector_entropy(nbar, xi, epsilon)?;
        Ok(Self {
            nbar,
            gross_work: gross,
            lo_cost: xi,
            feedforward_bound: theta_d * i,
            erasure_heat: theta_d * i_d,
        })
    }

    pub fn net_work(&self, mode: CostMode) -> f64 {
        let base = self.gross_work - self.lo_cost;
        match mode {
            CostMode::LocalOscillatorOnly => base,
            CostMode::WithFeedforward => base - self.feedforward_bound,
            CostMode::WithErasure => base - self.erasure_heat,
        }
    }

    pub fn efficiency(&self, mode: CostMode) -> f64 {
        self.net_work(mode) / self.nbar
    }
}
