//! Coarse-grained homodyne records, down to the two-outcome sign limit.
//!
//! When the count differences are only resolved into blocks of width R, the
//! feedback displacement can only target each block's conditional mean, and
//! the extracted work degrades smoothly from the fine-grained value (R -> 0)
//! to zero (a single block). Keeping just the sign of each axis is the
//! extreme two-block case; there the quadrant bookkeeping of the displaced
//! work uses unconditional quadrant-masked means, which is what makes the
//! gross work exactly 1/(2 pi) of the fine-grained gross work. The two
//! conventions (conditional block means here, unconditional quadrant means
//! for the sign case) are not interchangeable: a conditional two-block
//! treatment would give a factor 2/pi instead. The `Resolution::Sign`
//! sentinel therefore delegates to [`sign_work`].

use crate::error::{check_nonneg, check_pos, Error, Result};
use crate::homodyne::{HomodyneStats, OptimalParams};
use crate::numeric::{binary_entropy, gauss_legendre, normal_pdf, NeumaierSum};
use statrs::function::erf::erf;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Outcome-axis resolution: finite block width or the two-block sign limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    /// Blocks of width R in count units.
    Width(f64),
    /// Only the sign of each axis is recorded.
    Sign,
}

/// Block layout for a coarse-grained readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseGrainConfig {
    resolution: Resolution,
    /// Largest |M| retained; None grows the range until the missed
    /// probability is below 1e-12.
    block_range: Option<u32>,
}

impl CoarseGrainConfig {
    pub fn new(resolution: Resolution, block_range: Option<u32>) -> Result<Self> {
        if let Resolution::Width(r) = resolution {
            check_pos("resolution_R", r)?;
        }
        Ok(Self {
            resolution,
            block_range,
        })
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }
}

/// Probability that a N(mu, sigma^2) outcome falls in block M, whose edges
/// sit at mu + (M -/+ 1/2) R (the block lattice is anchored at the
/// distribution mean, so the mass depends only on M, R and sigma).
pub fn block_probability(mu: f64, sigma: f64, r: f64, m: i64) -> Result<f64> {
    check_pos("sigma", sigma)?;
    check_pos("resolution_R", r)?;
    let r1 = mu + (m as f64 - 0.5) * r;
    let r2 = mu + (m as f64 + 0.5) * r;
    Ok(0.5 * (erf((r2 - mu) / (SQRT_2 * sigma)) - erf((r1 - mu) / (SQRT_2 * sigma))))
}

/// E[u 1{u in block M}] for u ~ N(0, sigma^2): sigma^2 [pdf(r1) - pdf(r2)].
pub(crate) fn block_mass_weighted_mean(sigma: f64, r: f64, m: i64) -> f64 {
    let r1 = (m as f64 - 0.5) * r;
    let r2 = (m as f64 + 0.5) * r;
    sigma * (normal_pdf(r1 / sigma) - normal_pdf(r2 / sigma))
}

/// Displaced work before the oscillator cost, with conditional block means:
/// per axis sum_M p_M (slope * E[dn | M])^2, both axes combined.
pub fn coarse_displacement_work(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    config: &CoarseGrainConfig,
) -> Result<f64> {
    let r = match config.resolution {
        Resolution::Sign => return Ok(sign_work(nbar, xi, epsilon)?.total_gross),
        Resolution::Width(r) => r,
    };
    let stats = HomodyneStats::new(nbar, xi, epsilon)?;
    let sigma = stats.sigma_dn_sq.sqrt();
    let slope = stats.mean_gain;

    // Block M = 0 contributes nothing (symmetric mean); pair +/-M.
    let mut work = NeumaierSum::new();
    let mut covered = block_probability(0.0, sigma, r, 0)?;
    let m_max = config.block_range.map(u64::from).unwrap_or(u64::MAX);
    let mut m: u64 = 1;
    loop {
        if m > m_max {
            break;
        }
        let p = block_probability(0.0, sigma, r, m as i64)?;
        covered += 2.0 * p;
        if p > 0.0 {
            let mw = block_mass_weighted_mean(sigma, r, m as i64);
            // two symmetric blocks, two axes: 4 * p * (slope * mw / p)^2 / 2
            work.add(2.0 * (slope * mw) * (slope * mw) / p);
        }
        // beyond ~9 sigma the remaining mass is < 1e-12 of the total
        if config.block_range.is_none() && (m as f64 + 0.5) * r > 9.0 * sigma {
            break;
        }
        m += 1;
    }
    if 1.0 - covered > 1e-9 {
        return Err(Error::invalid(format!(
            "retained blocks cover only {covered:.12} of the outcome probability"
        )));
    }
    Ok(work.value())
}

/// Net coarse-grained work, displaced work minus the oscillator cost xi.
pub fn coarse_work(nbar: f64, xi: f64, epsilon: f64, config: &CoarseGrainConfig) -> Result<f64> {
    Ok(coarse_displacement_work(nbar, xi, epsilon, config)? - xi)
}

/// Per-quadrant displaced works for the sign measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantWork {
    pub w_pp: f64,
    pub w_pm: f64,
    pub w_mp: f64,
    pub w_mm: f64,
    /// Sum of the four quadrants.
    pub total_gross: f64,
    /// Local-oscillator investment xi.
    pub lo_cost: f64,
    /// total_gross - lo_cost.
    pub net: f64,
}

/// Work from displacing according to the recorded signs alone.
///
/// Each quadrant contributes (kappa^2/(16 gamma^2)) (2 sigma^2 / pi) built
/// from the unconditional quadrant-masked outcome means; the total is
/// exactly the fine-grained displaced work divided by 2 pi (the phase
/// information is never recorded).
pub fn sign_work(nbar: f64, xi: f64, epsilon: f64) -> Result<QuadrantWork> {
    let stats = HomodyneStats::new(nbar, xi, epsilon)?;
    let kappa_sq = 1.0 - epsilon;
    let per_quadrant = kappa_sq / (16.0 * stats.gamma * stats.gamma)
        * (2.0 * stats.sigma_dn_sq / std::f64::consts::PI);
    let total = 4.0 * per_quadrant;
    Ok(QuadrantWork {
        w_pp: per_quadrant,
        w_pm: per_quadrant,
        w_mp: per_quadrant,
        w_mm: per_quadrant,
        total_gross: total,
        lo_cost: xi,
        net: total - xi,
    })
}

/// Stationary xi along the sign-work ridge at fixed u = eps nbar.
fn sign_profiled_xi(nbar: f64, u: f64) -> f64 {
    let a = ((nbar - u) / TWO_PI).sqrt();
    u * (a - 1.0) / (u + 1.0)
}

fn sign_profiled_work(nbar: f64, u: f64) -> f64 {
    let a = ((nbar - u) / TWO_PI).sqrt();
    u * (a - 1.0) * (a - 1.0) / (u + 1.0)
}

/// Maximize the net sign-measurement work over (xi, eps).
///
/// Same reduction as the fine-grained optimizer with the displaced work
/// scaled by 1/(2 pi): the stationarity condition is
/// 2 pi A (A - 1) = u (u + 1) with A = sqrt((nbar - u)/(2 pi)), whose root
/// is unique on (0, nbar) whenever nbar > 2 pi. Below that threshold no
/// operating point has positive net work and the origin is returned.
pub fn optimize_sign(nbar: f64) -> Result<OptimalParams> {
    check_pos("nbar", nbar)?;
    if nbar <= TWO_PI {
        return Ok(OptimalParams {
            xi: 0.0,
            epsilon: 0.0,
            w_max: 0.0,
        });
    }
    let g = |u: f64| {
        let a = ((nbar - u) / TWO_PI).sqrt();
        TWO_PI * a * (a - 1.0) - u * (u + 1.0)
    };
    let u = bisect_sign(g, nbar)?;
    Ok(OptimalParams {
        xi: sign_profiled_xi(nbar, u),
        epsilon: u / nbar,
        w_max: sign_profiled_work(nbar, u),
    })
}

fn bisect_sign(g: impl FnMut(f64) -> f64, nbar: f64) -> Result<f64> {
    crate::numeric::bisect("sign work stationarity", g, 1e-300, nbar * (1.0 - 1e-12))
}

/// Large-nbar algebraic approximation to the sign optimum,
/// eps0 = (sqrt(nbar - sqrt(2 pi nbar) + 1) - 1)/nbar with the matching
/// profiled xi. Seed and asymptotic cross-check only.
pub fn closed_form_sign_params(nbar: f64) -> Result<OptimalParams> {
    check_pos("nbar", nbar)?;
    if nbar <= TWO_PI {
        return Ok(OptimalParams {
            xi: 0.0,
            epsilon: 0.0,
            w_max: 0.0,
        });
    }
    let root = (nbar - (TWO_PI * nbar).sqrt() + 1.0).sqrt();
    let epsilon = (root - 1.0) / nbar;
    let xi = sign_profiled_xi(nbar, epsilon * nbar);
    let w = sign_work(nbar, xi, epsilon)?.net;
    Ok(OptimalParams {
        xi,
        epsilon,
        w_max: w,
    })
}

/// Conditional probabilities of the four sign outcomes given the input point
/// (x, p), ordered (++, +-, -+, --) as (sign dn_x, sign dn_p).
///
/// Per axis q_+ = (1 + erf(mu/(sqrt 2 sigma_alpha)))/2 with mu_x =
/// beta sqrt(eps) x and sigma_alpha^2 = eps (x^2+p^2)/4 + beta^2; the two
/// axes are conditionally independent, so the four probabilities multiply
/// and sum to 1 identically.
pub fn quadrant_probabilities(x: f64, p: f64, xi: f64, epsilon: f64) -> [f64; 4] {
    let beta = (xi / 2.0).sqrt();
    let sigma_alpha = (epsilon * (x * x + p * p) / 4.0 + beta * beta).sqrt();
    let scale = beta * epsilon.sqrt() / (SQRT_2 * sigma_alpha);
    let qx = 0.5 * (1.0 + erf(scale * x));
    let qp = 0.5 * (1.0 + erf(scale * p));
    [qx * qp, qx * (1.0 - qp), (1.0 - qx) * qp, (1.0 - qx) * (1.0 - qp)]
}

/// Record entropy of the sign measurement: two fair bits, ln 4 nats.
pub fn sign_detector_entropy() -> f64 {
    4f64.ln()
}

/// Mutual information between the input point and the recorded signs,
/// I = ln 4 - E[ h(q_x) + h(q_p) ] over the thermal input, in nats.
///
/// Tensor Gauss-Legendre quadrature over [-8 sqrt(nbar), 8 sqrt(nbar)]^2
/// with node doubling until successive values agree to 1e-6.
pub fn sign_mutual_information(nbar: f64, xi: f64, epsilon: f64) -> Result<f64> {
    check_pos("nbar", nbar)?;
    check_nonneg("xi", xi)?;
    crate::error::check_range("epsilon", epsilon, 0.0, 1.0)?;
    if xi == 0.0 || epsilon == 0.0 {
        return Ok(0.0);
    }
    let half_width = 8.0 * nbar.sqrt();
    let mut last = f64::NAN;
    let mut n = 64;
    while n <= 512 {
        let value = sign_mi_quadrature(nbar, xi, epsilon, half_width, n);
        if (value - last).abs() < 1e-6 {
            return Ok(value.max(0.0));
        }
        last = value;
        n *= 2;
    }
    Err(Error::NoConvergence {
        context: "sign mutual information quadrature",
        iterations: 512,
        residual: last,
    })
}

fn sign_mi_quadrature(nbar: f64, xi: f64, epsilon: f64, half_width: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let beta = (xi / 2.0).sqrt();
    let scale_out = beta * epsilon.sqrt();
    let norm = 1.0 / (TWO_PI * nbar);
    let mut acc = NeumaierSum::new();
    for (i, &xn) in nodes.iter().enumerate() {
        let x = half_width * xn;
        for (j, &pn) in nodes.iter().enumerate() {
            let p = half_width * pn;
            let sigma_alpha = (epsilon * (x * x + p * p) / 4.0 + beta * beta).sqrt();
            let s = scale_out / (SQRT_2 * sigma_alpha);
            let qx = 0.5 * (1.0 + erf(s * x));
            let qp = 0.5 * (1.0 + erf(s * p));
            let density = norm * (-(x * x + p * p) / (2.0 * nbar)).exp();
            acc.add(
                weights[i]
                    * weights[j]
                    * half_width
                    * half_width
                    * density
                    * (binary_entropy(qx) + binary_entropy(qp)),
            );
        }
    }
    4f64.ln() - acc.value()
}
