//! Seeded Monte Carlo over the physical measurement chain: thermal
//! phase-space samples through a beam splitter into photocounters or the
//! balanced eight-port homodyne layout. Every closed-form work and
//! information result has an estimator here whose expectation is that
//! closed form, so a 4-standard-error comparison is a real test.
//!
//! Sampling always fans out over a fixed set of 64 logical streams
//! (ChaCha8, one sub-stream per index) regardless of how many worker
//! threads run them, and partial results merge in stream order, so a given
//! (seed, n_samples) pair is bit-identical across worker counts.
//!
//! Which chain feeds which estimator:
//! - photocount and fine-grained homodyne estimators run the exact Poisson
//!   chain; their targets (permutation work, conditional-mean work, the
//!   count mutual information, record entropies) are exact functionals of
//!   Poisson statistics, so these estimators are unbiased with no
//!   approximation gap.
//! - sign and coarse-grained work estimators draw the count differences
//!   from the Gaussian record model those formulas are written in; the
//!   fidelity of that model to the Poisson chain is itself validated at the
//!   moment level by the homodyne chain tests.

use crate::coarse::{self, quadrant_probabilities};
use crate::error::{check_nonneg, check_pos, Error, Result};
use crate::homodyne::HomodyneStats;
use crate::numeric::{gauss_legendre, NeumaierSum};
use crate::photocount::{
    check_kappa_sq, conditional_distribution, passivize_work, reflected_count_distribution,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// Logical sample streams; fixed so results do not depend on thread count.
pub const N_STREAMS: u64 = 64;

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Independent evaluation units behind the estimate (samples, pairs,
    /// or accepted samples for conditional estimators).
    pub n_samples: u64,
}

impl McEstimate {
    /// Signed distance to a reference value in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.std_error
    }
}

/// Histogram-based information estimate: plug-in value, a reported (not
/// subtracted) small-sample bias magnitude, and an undersampling flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiReport {
    pub estimate: McEstimate,
    /// Miller-Madow-style bias magnitude of the plug-in estimator.
    pub bias_bound: f64,
    /// More than 10% of occupied bins hold fewer than 5 counts.
    pub undersampled: bool,
}

/// Running mean and second central moment (Welford), mergeable in fixed
/// order without loss of determinism.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * (other.n as f64 / n as f64),
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64),
        }
    }

    pub(crate) fn estimate(&self) -> McEstimate {
        let se = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).max(0.0).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error: se,
            n_samples: self.n,
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn stream_lengths(total: u64) -> Vec<u64> {
    let base = total / N_STREAMS;
    let extra = total % N_STREAMS;
    (0..N_STREAMS)
        .map(|s| base + u64::from(s < extra))
        .collect()
}

/// Run one closure per stream on a pool of `workers` threads and return the
/// per-stream results in stream order.
pub(crate) fn run_streams<T, F>(n_samples: u64, seed: u64, workers: usize, per_stream: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    if workers == 0 {
        return Err(Error::invalid("workers must be at least 1"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    let lengths = stream_lengths(n_samples);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..N_STREAMS)
            .into_par_iter()
            .map(|s| {
                let mut rng = stream_rng(seed, s);
                per_stream(&mut rng, lengths[s as usize])
            })
            .collect()
    }))
}

fn mean_over_streams<F>(n_samples: u64, seed: u64, workers: usize, value: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts = run_streams(n_samples, seed, workers, |rng, len| {
        let mut acc = Welford::default();
        for _ in 0..len {
            acc.push(value(rng));
        }
        acc
    })?;
    Ok(parts
        .into_iter()
        .fold(Welford::default(), Welford::merge)
        .estimate())
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(lambda)
        .expect("positive finite Poisson mean")
        .sample(rng);
    draw as u64
}

/// One phase-space point (x, p) of a thermal mode, each coordinate a
/// zero-mean Gaussian of variance nbar.
pub fn sample_thermal_alpha<R: Rng + ?Sized>(nbar: f64, rng: &mut R) -> (f64, f64) {
    if nbar <= 0.0 {
        return (0.0, 0.0);
    }
    let sd = nbar.sqrt();
    let zx: f64 = rng.sample(StandardNormal);
    let zp: f64 = rng.sample(StandardNormal);
    (sd * zx, sd * zp)
}

/// Reflected photocount for input amplitude (x, p): Poisson with mean
/// (1 - kappa^2)(x^2 + p^2)/2.
pub fn simulate_photocount<R: Rng + ?Sized>(x: f64, p: f64, kappa_sq: f64, rng: &mut R) -> u64 {
    let lambda = (1.0 - kappa_sq) * (x * x + p * p) / 2.0;
    poisson_draw(lambda, rng)
}

/// Exact eight-port chain: the reflected amplitude splits 50:50 into an
/// x-arm mixed with a real oscillator beta and a p-arm mixed with an
/// imaginary one; the four detector intensities are Poisson. Returns the
/// two count differences (n1 - n2, n3 - n4).
///
/// Conditional on (x, p) the differences have means (beta sqrt(eps) x,
/// beta sqrt(eps) p) and common variance eps(x^2 + p^2)/4 + beta^2, with
/// eps = 1 - kappa^2.
pub fn simulate_homodyne<R: Rng + ?Sized>(
    x: f64,
    p: f64,
    beta: f64,
    kappa_sq: f64,
    rng: &mut R,
) -> (i64, i64) {
    let eps = 1.0 - kappa_sq;
    let base = eps * (x * x + p * p) / 4.0 + beta * beta;
    let shift_x = beta * eps.sqrt() * x;
    let shift_p = beta * eps.sqrt() * p;
    let n1 = poisson_draw((base + shift_x) / 2.0, rng) as i64;
    let n2 = poisson_draw((base - shift_x) / 2.0, rng) as i64;
    let n3 = poisson_draw((base + shift_p) / 2.0, rng) as i64;
    let n4 = poisson_draw((base - shift_p) / 2.0, rng) as i64;
    (n1 - n2, n3 - n4)
}

/// Gaussian approximation of the same chain: the count differences drawn
/// directly from normals with the conditional mean and variance above.
pub fn simulate_homodyne_gaussian<R: Rng + ?Sized>(
    x: f64,
    p: f64,
    beta: f64,
    kappa_sq: f64,
    rng: &mut R,
) -> (f64, f64) {
    let eps = 1.0 - kappa_sq;
    let sd = (eps * (x * x + p * p) / 4.0 + beta * beta).sqrt();
    let zx: f64 = rng.sample(StandardNormal);
    let zp: f64 = rng.sample(StandardNormal);
    (
        beta * eps.sqrt() * x + sd * zx,
        beta * eps.sqrt() * p + sd * zp,
    )
}

fn check_operating_point(nbar: f64, xi: f64, epsilon: f64) -> Result<()> {
    check_pos("nbar", nbar)?;
    check_nonneg("xi", xi)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Photocount-and-permute work: each sample draws a thermal point, counts
/// the reflected quanta, and scores the permutation work of the matching
/// conditional state. The expectation is the outcome-averaged work.
pub fn estimate_work_photocount(
    nbar: f64,
    kappa_sq: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let r = 1.0 - kappa_sq;
    if r == 0.0 {
        return mean_over_streams(n_samples, seed, workers, |_| 0.0);
    }
    // work table out to the 1e-12 record tail; rare larger counts are
    // computed on the fly from the same pure function
    let rn = r * nbar;
    let m_table = ((-12.0 * std::f64::consts::LN_10) / (rn / (rn + 1.0)).ln()).ceil() as u32 + 2;
    let work_of = |m: u32| -> f64 {
        let cond = conditional_distribution(nbar, kappa_sq, m, None)
            .expect("conditional state inside validated domain");
        passivize_work(cond.probs())
    };
    let table: Vec<f64> = (0..=m_table).map(work_of).collect();
    mean_over_streams(n_samples, seed, workers, |rng| {
        let (x, p) = sample_thermal_alpha(nbar, rng);
        let m = simulate_photocount(x, p, kappa_sq, rng) as u32;
        table
            .get(m as usize)
            .copied()
            .unwrap_or_else(|| work_of(m))
    })
}

/// Fine-grained homodyne work: per sample, square the linear conditional
/// mean built from the count differences and subtract the oscillator cost.
/// E[slope^2 (dn_x^2 + dn_p^2)/2] equals the displacement work exactly.
pub fn estimate_work_homodyne(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_operating_point(nbar, xi, epsilon)?;
    if xi == 0.0 || epsilon == 0.0 {
        return mean_over_streams(n_samples, seed, workers, |_| 0.0);
    }
    let stats = HomodyneStats::new(nbar, xi, epsilon)?;
    let slope = stats.mean_gain;
    let beta = (xi / 2.0).sqrt();
    let kappa_sq = 1.0 - epsilon;
    mean_over_streams(n_samples, seed, workers, |rng| {
        let (x, p) = sample_thermal_alpha(nbar, rng);
        let (dx, dp) = simulate_homodyne(x, p, beta, kappa_sq, rng);
        let (dx, dp) = (dx as f64, dp as f64);
        slope * slope * (dx * dx + dp * dp) / 2.0 - xi
    })
}

/// Sign-record work via independent pairs: only same-quadrant pairs
/// contribute, making the pair product an unbiased estimate of the sum of
/// squared quadrant-masked displacement means. Count differences come from
/// the Gaussian record model the quadrant formula is written in.
/// `n_samples` counts chain draws; the estimate uses n_samples/2 pairs.
pub fn estimate_work_sign(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_operating_point(nbar, xi, epsilon)?;
    let n_pairs = (n_samples / 2).max(1);
    if xi == 0.0 || epsilon == 0.0 {
        return mean_over_streams(n_pairs, seed, workers, |_| 0.0);
    }
    let stats = HomodyneStats::new(nbar, xi, epsilon)?;
    let slope = stats.mean_gain;
    let sd = stats.sigma_dn_sq.sqrt();
    mean_over_streams(n_pairs, seed, workers, |rng| {
        let draw = |rng: &mut ChaCha8Rng| -> (f64, f64) {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            (sd * u, sd * v)
        };
        let (u1, v1) = draw(rng);
        let (u2, v2) = draw(rng);
        let same_quadrant = (u1 > 0.0) == (u2 > 0.0) && (v1 > 0.0) == (v2 > 0.0);
        if same_quadrant {
            slope * slope * (u1 * u2 + v1 * v2) / 2.0 - xi
        } else {
            -xi
        }
    })
}

/// Coarse-grained work: bin each Gaussian-model count difference into its
/// block, apply the closed-form per-block displacement, and score the
/// squared displacement minus the oscillator cost.
pub fn estimate_work_coarse(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    resolution: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_operating_point(nbar, xi, epsilon)?;
    check_pos("resolution", resolution)?;
    if xi == 0.0 || epsilon == 0.0 {
        return mean_over_streams(n_samples, seed, workers, |_| 0.0);
    }
    let stats = HomodyneStats::new(nbar, xi, epsilon)?;
    let slope = stats.mean_gain;
    let sd = stats.sigma_dn_sq.sqrt();
    // conditional block means are deterministic given the block index
    let displacement = |block: i64| -> f64 {
        if block == 0 {
            return 0.0;
        }
        let p = coarse::block_probability(0.0, sd, resolution, block)
            .expect("validated block inputs");
        if p < 1e-300 {
            return slope * block as f64 * resolution;
        }
        slope * coarse::block_mass_weighted_mean(sd, resolution, block) / p
    };
    mean_over_streams(n_samples, seed, workers, |rng| {
        let zu: f64 = rng.sample(StandardNormal);
        let zv: f64 = rng.sample(StandardNormal);
        let bu = (sd * zu / resolution).round() as i64;
        let bv = (sd * zv / resolution).round() as i64;
        let du = displacement(bu);
        let dv = displacement(bv);
        (du * du + dv * dv) / 2.0 - xi
    })
}

/// Schemes with a histogram-based mutual-information estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MiScheme {
    /// Input quanta against reflected count.
    Photocount { nbar: f64, kappa_sq: f64 },
    /// Binned phase-space point against the two-bit sign record.
    Sign {
        nbar: f64,
        xi: f64,
        epsilon: f64,
        binning: SignBinning,
    },
}

/// Phase-space binning for the sign-record histogram: `bins` per axis over
/// [-half_width_sigmas, +half_width_sigmas] standard deviations, outer
/// samples clamped into the edge bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignBinning {
    pub bins: usize,
    pub half_width_sigmas: f64,
}

impl Default for SignBinning {
    fn default() -> Self {
        Self {
            bins: 40,
            half_width_sigmas: 5.0,
        }
    }
}

struct JointCounts {
    counts: BTreeMap<(u32, u32), u64>,
}

impl JointCounts {
    fn merge(mut self, other: JointCounts) -> JointCounts {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self
    }

    fn mi_report(&self) -> MiReport {
        let n: u64 = self.counts.values().sum();
        let nf = n as f64;
        let mut rows: BTreeMap<u32, u64> = BTreeMap::new();
        let mut cols: BTreeMap<u32, u64> = BTreeMap::new();
        for (&(a, b), &c) in &self.counts {
            *rows.entry(a).or_insert(0) += c;
            *cols.entry(b).or_insert(0) += c;
        }
        let mut mi = NeumaierSum::default();
        let mut second = NeumaierSum::default();
        let mut small_bins = 0u64;
        for (&(a, b), &c) in &self.counts {
            if c < 5 {
                small_bins += 1;
            }
            let g = (c as f64 * nf / (rows[&a] as f64 * cols[&b] as f64)).ln();
            let w = c as f64 / nf;
            mi.add(w * g);
            second.add(w * g * g);
        }
        let mean = mi.value();
        let var = (second.value() - mean * mean).max(0.0);
        let k_joint = self.counts.len() as f64;
        let bias = (k_joint - rows.len() as f64 - cols.len() as f64 + 1.0).abs() / (2.0 * nf);
        MiReport {
            estimate: McEstimate {
                mean,
                std_error: (var / nf).sqrt(),
                n_samples: n,
            },
            bias_bound: bias,
            undersampled: small_bins as f64 > 0.1 * self.counts.len() as f64,
        }
    }
}

fn histogram_over_streams<F>(
    n_samples: u64,
    seed: u64,
    workers: usize,
    sample_key: F,
) -> Result<JointCounts>
where
    F: Fn(&mut ChaCha8Rng) -> (u32, u32) + Sync,
{
    let parts = run_streams(n_samples, seed, workers, |rng, len| {
        let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for _ in 0..len {
            *counts.entry(sample_key(rng)).or_insert(0) += 1;
        }
        JointCounts { counts }
    })?;
    Ok(parts
        .into_iter()
        .reduce(JointCounts::merge)
        .expect("at least one stream"))
}

/// Plug-in mutual information from empirical joint histograms. Bias is
/// reported, not subtracted.
pub fn estimate_mutual_information(
    scheme: &MiScheme,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<MiReport> {
    match *scheme {
        MiScheme::Photocount { nbar, kappa_sq } => {
            check_nonneg("nbar", nbar)?;
            check_kappa_sq(kappa_sq)?;
            // the splitter thins the input Poisson number: transmitted and
            // reflected counts are independent given alpha, and their sum
            // against the reflected count reproduces the input-count joint
            let hist = histogram_over_streams(n_samples, seed, workers, |rng| {
                let (x, p) = sample_thermal_alpha(nbar, rng);
                let m = simulate_photocount(x, p, kappa_sq, rng);
                let lambda_t = kappa_sq * (x * x + p * p) / 2.0;
                let n_transmitted = poisson_draw(lambda_t, rng);
                ((n_transmitted + m) as u32, m as u32)
            })?;
            Ok(hist.mi_report())
        }
        MiScheme::Sign {
            nbar,
            xi,
            epsilon,
            binning,
        } => {
            check_operating_point(nbar, xi, epsilon)?;
            if binning.bins < 4 {
                return Err(Error::invalid("sign binning needs at least 4 bins per axis"));
            }
            check_pos("half_width_sigmas", binning.half_width_sigmas)?;
            let bins = binning.bins as u32;
            let half = binning.half_width_sigmas * nbar.sqrt();
            let width = 2.0 * half / bins as f64;
            let bin_of = move |t: f64| -> u32 {
                let raw = ((t + half) / width).floor();
                (raw.max(0.0) as u32).min(bins - 1)
            };
            let hist = histogram_over_streams(n_samples, seed, workers, |rng| {
                let (x, p) = sample_thermal_alpha(nbar, rng);
                let q = quadrant_probabilities(x, p, xi, epsilon);
                let u: f64 = rng.random();
                let mut outcome = 0u32;
                let mut cum = 0.0;
                for (i, &qi) in q.iter().enumerate() {
                    cum += qi;
                    if u < cum {
                        outcome = i as u32;
                        break;
                    }
                    outcome = 3;
                }
                (bin_of(x) * bins + bin_of(p), outcome)
            })?;
            Ok(hist.mi_report())
        }
    }
}

/// Exact value of the binned sign mutual information the MC histogram
/// estimates: the thermal density is integrated cell by cell (edge cells
/// extended to 12 standard deviations) against the quadrant kernel.
pub fn sign_binned_mi_reference(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    binning: &SignBinning,
) -> Result<f64> {
    check_operating_point(nbar, xi, epsilon)?;
    check_pos("xi", xi)?;
    check_pos("epsilon", epsilon)?;
    if binning.bins < 4 {
        return Err(Error::invalid("sign binning needs at least 4 bins per axis"));
    }
    let bins = binning.bins;
    let sd = nbar.sqrt();
    let half = binning.half_width_sigmas * sd;
    let width = 2.0 * half / bins as f64;
    // integration panels: the binning grid plus one tail panel per side,
    // accumulated into the adjacent edge bin
    let mut panels: Vec<(usize, f64, f64)> = Vec::with_capacity(bins + 2);
    panels.push((0, -12.0 * sd, -half));
    for i in 0..bins {
        panels.push((i, -half + i as f64 * width, -half + (i + 1) as f64 * width));
    }
    panels.push((bins - 1, half, 12.0 * sd));

    let (nodes, weights) = gauss_legendre(8);
    let gauss = |t: f64| (-t * t / (2.0 * nbar)).exp() / (2.0 * std::f64::consts::PI * nbar).sqrt();

    // joint[cell][outcome] and cell mass
    let mut joint = vec![[0.0f64; 4]; bins * bins];
    let mut mass = vec![0.0f64; bins * bins];
    for &(ix, xa, xb) in &panels {
        let xc = 0.5 * (xa + xb);
        let xr = 0.5 * (xb - xa);
        for &(ip, pa, pb) in &panels {
            let pc = 0.5 * (pa + pb);
            let pr = 0.5 * (pb - pa);
            let cell = ix * bins + ip;
            for (kx, &nx) in nodes.iter().enumerate() {
                let x = xc + xr * nx;
                let wx = weights[kx] * xr * gauss(x);
                for (kp, &np) in nodes.iter().enumerate() {
                    let p = pc + pr * np;
                    let w = wx * weights[kp] * pr * gauss(p);
                    let q = quadrant_probabilities(x, p, xi, epsilon);
                    for (o, &qo) in q.iter().enumerate() {
                        joint[cell][o] += w * qo;
                    }
                    mass[cell] += w;
                }
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::NoConvergence {
            context: "binned sign information quadrature",
            iterations: panels.len(),
            residual: (total - 1.0).abs(),
        });
    }
    let mut outcome_marginal = [0.0f64; 4];
    for cell in &joint {
        for (o, &v) in cell.iter().enumerate() {
            outcome_marginal[o] += v;
        }
    }
    let mut mi = NeumaierSum::default();
    for (cell, &m) in joint.iter().zip(&mass) {
        for (o, &v) in cell.iter().enumerate() {
            if v > 1e-300 {
                mi.add(v * (v / (m * outcome_marginal[o])).ln());
            }
        }
    }
    Ok(mi.value().max(0.0))
}

/// Plug-in entropy of the reflected-count record.
pub fn estimate_record_entropy_photocount(
    nbar: f64,
    kappa_sq: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<MiReport> {
    check_nonneg("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    let hist = histogram_over_streams(n_samples, seed, workers, |rng| {
        let (x, p) = sample_thermal_alpha(nbar, rng);
        (simulate_photocount(x, p, kappa_sq, rng) as u32, 0)
    })?;
    Ok(entropy_report(&hist))
}

/// Plug-in entropy of the four-outcome sign record (ln 4 when operational).
pub fn estimate_record_entropy_sign(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<MiReport> {
    check_operating_point(nbar, xi, epsilon)?;
    let stats = HomodyneStats::new(nbar, xi, epsilon)?;
    let sd = stats.sigma_dn_sq.sqrt();
    let hist = histogram_over_streams(n_samples, seed, workers, |rng| {
        let u: f64 = rng.sample(StandardNormal);
        let v: f64 = rng.sample(StandardNormal);
        let outcome = u32::from(sd * u > 0.0) * 2 + u32::from(sd * v > 0.0);
        (outcome, 0)
    })?;
    Ok(entropy_report(&hist))
}

fn entropy_report(hist: &JointCounts) -> MiReport {
    let n: u64 = hist.counts.values().sum();
    let nf = n as f64;
    let mut h = NeumaierSum::default();
    let mut second = NeumaierSum::default();
    let mut small = 0u64;
    for &c in hist.counts.values() {
        if c < 5 {
            small += 1;
        }
        let w = c as f64 / nf;
        let g = -w.ln();
        h.add(w * g);
        second.add(w * g * g);
    }
    let mean = h.value();
    let var = (second.value() - mean * mean).max(0.0);
    MiReport {
        estimate: McEstimate {
            mean,
            std_error: (var / nf).sqrt(),
            n_samples: n,
        },
        bias_bound: (hist.counts.len() as f64 - 1.0) / (2.0 * nf),
        undersampled: small as f64 > 0.1 * hist.counts.len() as f64,
    }
}

/// Homodyne mutual information from per-axis sample correlations between
/// the input quadrature and its count difference: I = -(1/2) ln(1 - rho^2)
/// per axis, summed. The standard error uses the delta method.
pub fn estimate_mi_homodyne(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_operating_point(nbar, xi, epsilon)?;
    if xi == 0.0 || epsilon == 0.0 {
        return mean_over_streams(n_samples, seed, workers, |_| 0.0);
    }
    let beta = (xi / 2.0).sqrt();
    let kappa_sq = 1.0 - epsilon;
    // raw sums per axis: x, x^2, d, d^2, x*d
    #[derive(Clone, Copy, Default)]
    struct Sums {
        n: f64,
        a: [f64; 10],
    }
    let parts = run_streams(n_samples, seed, workers, |rng, len| {
        let mut s = Sums::default();
        for _ in 0..len {
            let (x, p) = sample_thermal_alpha(nbar, rng);
            let (dx, dp) = simulate_homodyne(x, p, beta, kappa_sq, rng);
            let (dx, dp) = (dx as f64, dp as f64);
            s.n += 1.0;
            let terms = [
                x,
                x * x,
                dx,
                dx * dx,
                x * dx,
                p,
                p * p,
                dp,
                dp * dp,
                p * dp,
            ];
            for (acc, t) in s.a.iter_mut().zip(terms) {
                *acc += t;
            }
        }
        s
    })?;
    let merged = parts.into_iter().fold(Sums::default(), |mut acc, s| {
        acc.n += s.n;
        for (a, b) in acc.a.iter_mut().zip(s.a) {
            *a += b;
        }
        acc
    });
    let n = merged.n;
    let axis = |off: usize| -> (f64, f64) {
        let [sx, sxx, sd, sdd, sxd] =
            [0, 1, 2, 3, 4].map(|k| merged.a[off + k]);
        let vx = sxx / n - (sx / n) * (sx / n);
        let vd = sdd / n - (sd / n) * (sd / n);
        let cov = sxd / n - (sx / n) * (sd / n);
        let rho2 = (cov * cov / (vx * vd)).min(1.0 - 1e-15);
        // dI/drho = rho/(1-rho^2), se(rho) = (1-rho^2)/sqrt(n)
        (-0.5 * (-rho2).ln_1p(), rho2.sqrt() / n.sqrt())
    };
    let (ix, se_x) = axis(0);
    let (ip, se_p) = axis(5);
    Ok(McEstimate {
        mean: ix + ip,
        std_error: (se_x * se_x + se_p * se_p).sqrt(),
        n_samples: n as u64,
    })
}

/// Differential record entropy per the Gaussian record: 1 + ln(2 pi
/// sigma^2) with sigma^2 the sampled count-difference variance (pooled
/// over both axes).
pub fn estimate_record_entropy_homodyne(
    nbar: f64,
    xi: f64,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_operating_point(nbar, xi, epsilon)?;
    check_pos("xi", xi)?;
    check_pos("epsilon", epsilon)?;
    let beta = (xi / 2.0).sqrt();
    let kappa_sq = 1.0 - epsilon;
    let pooled = mean_over_streams(n_samples, seed, workers, |rng| {
        let (x, p) = sample_thermal_alpha(nbar, rng);
        let (dx, dp) = simulate_homodyne(x, p, beta, kappa_sq, rng);
        let (dx, dp) = (dx as f64, dp as f64);
        (dx * dx + dp * dp) / 2.0
    })?;
    Ok(McEstimate {
        mean: 1.0 + (2.0 * std::f64::consts::PI * pooled.mean).ln(),
        std_error: pooled.std_error / pooled.mean,
        n_samples: pooled.n_samples,
    })
}

/// Goodness-of-fit summary for the reflected-count record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Chi-square test of the empirical reflected-count record against the
/// geometric closed form, over m <= m_cap plus a pooled tail bin.
pub fn photocount_record_chi_square(
    nbar: f64,
    kappa_sq: f64,
    m_cap: u32,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<ChiSquareReport> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    if kappa_sq == 1.0 {
        return Err(Error::invalid(
            "record is degenerate at kappa_sq = 1; no test to run",
        ));
    }
    let hist = histogram_over_streams(n_samples, seed, workers, |rng| {
        let (x, p) = sample_thermal_alpha(nbar, rng);
        ((simulate_photocount(x, p, kappa_sq, rng) as u32).min(m_cap + 1), 0)
    })?;
    let n: u64 = hist.counts.values().sum();
    let mut statistic = 0.0;
    let mut tail = 1.0;
    for m in 0..=m_cap {
        let p = reflected_count_distribution(nbar, kappa_sq, m)?;
        tail -= p;
        let expected = p * n as f64;
        let observed = hist.counts.get(&(m, 0)).copied().unwrap_or(0) as f64;
        statistic += (observed - expected).powi(2) / expected;
    }
    let expected_tail = (tail.max(0.0) * n as f64).max(1e-300);
    let observed_tail = hist.counts.get(&(m_cap + 1, 0)).copied().unwrap_or(0) as f64;
    statistic += (observed_tail - expected_tail).powi(2) / expected_tail;
    let dof = u64::from(m_cap) + 1;
    let chi = ChiSquared::new(dof as f64)
        .map_err(|e| Error::invalid(format!("chi-square dof: {e}")))?;
    Ok(ChiSquareReport {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
    })
}

/// Second-order coherence of the transmitted beam conditioned on the
/// reflected count: normally ordered moments of the conditional coherent
/// mixture, with a delta-method standard error for the moment ratio.
pub fn transmitted_g2_given_m(
    nbar: f64,
    kappa_sq: f64,
    m_condition: u32,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    check_pos("nbar", nbar)?;
    check_kappa_sq(kappa_sq)?;
    #[derive(Clone, Copy, Default)]
    struct Cond {
        n: f64,
        sa: f64,
        sb: f64,
        saa: f64,
        sbb: f64,
        sab: f64,
    }
    let parts = run_streams(n_samples, seed, workers, |rng, len| {
        let mut c = Cond::default();
        for _ in 0..len {
            let (x, p) = sample_thermal_alpha(nbar, rng);
            let m = simulate_photocount(x, p, kappa_sq, rng) as u32;
            if m != m_condition {
                continue;
            }
            let b = kappa_sq * (x * x + p * p) / 2.0;
            let a = b * b;
            c.n += 1.0;
            c.sa += a;
            c.sb += b;
            c.saa += a * a;
            c.sbb += b * b;
            c.sab += a * b;
        }
        c
    })?;
    let t = parts.into_iter().fold(Cond::default(), |mut acc, c| {
        acc.n += c.n;
        acc.sa += c.sa;
        acc.sb += c.sb;
        acc.saa += c.saa;
        acc.sbb += c.sbb;
        acc.sab += c.sab;
        acc
    });
    if t.n < 2.0 {
        return Err(Error::invalid(format!(
            "fewer than 2 samples matched m = {m_condition}"
        )));
    }
    let (a, b) = (t.sa / t.n, t.sb / t.n);
    let va = t.saa / t.n - a * a;
    let vb = t.sbb / t.n - b * b;
    let cab = t.sab / t.n - a * b;
    let g = a / (b * b);
    let var_g = (va / (b * b * b * b) + 4.0 * a * a * vb / b.powi(6)
        - 4.0 * a * cab / b.powi(5))
        / t.n;
    Ok(McEstimate {
        mean: g,
        std_error: var_g.max(0.0).sqrt(),
        n_samples: t.n as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne;
    use approx::assert_relative_eq;

    const SEED: u64 = 20260815;

    #[test]
    fn thermal_sampler_moments() {
        let mut rng = stream_rng(SEED, 0);
        assert_eq!(sample_thermal_alpha(0.0, &mut rng), (0.0, 0.0));
        let n = 400_000;
        let nbar = 20.0;
        let (mut sx, mut sxx, mut sxp) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, p) = sample_thermal_alpha(nbar, &mut rng);
            sx += x;
            sxx += x * x;
            sxp += x * p;
        }
        let nf = n as f64;
        // se(mean) = sqrt(nbar/n); se(var) ~ nbar sqrt(2/n); se(xp) = nbar/sqrt(n)
        assert!((sx / nf).abs() < 4.0 * (nbar / nf).sqrt());
        assert!((sxx / nf - nbar).abs() < 4.0 * nbar * (2.0 / nf).sqrt());
        assert!((sxp / nf).abs() < 4.0 * nbar / nf.sqrt());
    }

    #[test]
    fn photocount_chain_basics() {
        let mut rng = stream_rng(SEED, 1);
        for _ in 0..100 {
            let (x, p) = sample_thermal_alpha(20.0, &mut rng);
            assert_eq!(simulate_photocount(x, p, 1.0, &mut rng), 0);
        }
        let n = 200_000;
        let (nbar, ksq) = (20.0, 0.9);
        let mut sum = 0.0;
        for _ in 0..n {
            let (x, p) = sample_thermal_alpha(nbar, &mut rng);
            sum += simulate_photocount(x, p, ksq, &mut rng) as f64;
        }
        let mean = sum / n as f64;
        let target = (1.0 - ksq) * nbar;
        // record variance = Rn(Rn+2) for the geometric record
        let sd = (target * (target + 2.0) / n as f64).sqrt();
        assert!((mean - target).abs() < 4.0 * sd, "m mean {mean} vs {target}");
    }

    #[test]
    fn record_matches_geometric_chi_square() {
        let report =
            photocount_record_chi_square(20.0, 0.9, 30, 1_000_000, SEED, 4).unwrap();
        assert!(
            report.p_value > 0.001,
            "chi2 = {} (dof {}), p = {}",
            report.statistic,
            report.dof,
            report.p_value
        );
    }

    #[test]
    fn conditional_g2_is_sub_thermal() {
        let est = transmitted_g2_given_m(20.0, 0.9, 5, 1_000_000, SEED, 4).unwrap();
        let z = est.z_score(7.0 / 6.0);
        assert!(z.abs() < 4.0, "g2 {} +- {} (z {z})", est.mean, est.std_error);
        assert!(est.n_samples > 10_000);
    }

    #[test]
    fn homodyne_chain_conditional_moments() {
        let (x, p, beta, ksq) = (3.0f64, -2.0f64, 1.5f64, 0.9f64);
        let eps = 1.0 - ksq;
        let mu = beta * eps.sqrt() * x;
        let var = eps * (x * x + p * p) / 4.0 + beta * beta;
        let n = 400_000;
        let mut rng = stream_rng(SEED, 2);
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (dx, _) = simulate_homodyne(x, p, beta, ksq, &mut rng);
            let d = dx as f64 - mu;
            s1 += dx as f64;
            s2 += d * d;
            s4 += d * d * d * d;
        }
        let nf = n as f64;
        let mean = s1 / nf;
        assert!((mean - mu).abs() < 4.0 * (var / nf).sqrt(), "mean {mean} vs {mu}");
        let v_hat = s2 / nf;
        let se_var = ((s4 / nf - v_hat * v_hat) / nf).sqrt();
        assert!((v_hat - var).abs() < 4.0 * se_var, "var {v_hat} vs {var}");
    }

    #[test]
    fn homodyne_chain_vacuum_input() {
        let beta = 2.0;
        let n = 200_000;
        let mut rng = stream_rng(SEED, 3);
        let (mut sx, mut sxx, mut spp) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (dx, dp) = simulate_homodyne(0.0, 0.0, beta, 0.9, &mut rng);
            sx += dx as f64;
            sxx += (dx * dx) as f64;
            spp += (dp * dp) as f64;
        }
        let nf = n as f64;
        let b2 = beta * beta;
        assert!((sx / nf).abs() < 4.0 * (b2 / nf).sqrt());
        // per-axis variance beta^2, so the two axes together carry 2 beta^2
        let se = b2 * (3.0 / nf).sqrt();
        assert!((sxx / nf - b2).abs() < 4.0 * se);
        assert!((sxx / nf + spp / nf - 2.0 * b2).abs() < 8.0 * se);
    }

    #[test]
    fn exact_and_gaussian_chains_agree_at_large_nbar() {
        let nbar = 100.0;
        let opt = homodyne::optimize(nbar).unwrap();
        let beta = (opt.xi / 2.0).sqrt();
        let ksq = 1.0 - opt.epsilon;
        let sigma_sq = HomodyneStats::new(nbar, opt.xi, opt.epsilon)
            .unwrap()
            .sigma_dn_sq;
        let n = 200_000;
        let run = |gaussian: bool| -> (f64, f64) {
            let mut rng = stream_rng(SEED, 4);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let (x, p) = sample_thermal_alpha(nbar, &mut rng);
                let dx = if gaussian {
                    simulate_homodyne_gaussian(x, p, beta, ksq, &mut rng).0
                } else {
                    simulate_homodyne(x, p, beta, ksq, &mut rng).0 as f64
                };
                s1 += dx;
                s2 += dx * dx;
            }
            (s1 / n as f64, s2 / n as f64)
        };
        let (m_exact, v_exact) = run(false);
        let (m_gauss, v_gauss) = run(true);
        let nf = n as f64;
        let se_mean = (sigma_sq / nf).sqrt() * 2f64.sqrt();
        // heavy-tailed marginal: generous fourth-moment factor
        let se_var = sigma_sq * (8.0 / nf).sqrt() * 2f64.sqrt();
        assert!((m_exact - m_gauss).abs() < 4.0 * se_mean);
        assert!((v_exact - v_gauss).abs() < 4.0 * se_var);
        // and the exact chain reproduces the closed-form record variance
        assert!(
            (v_exact - sigma_sq).abs() < 4.0 * sigma_sq * (8.0 / nf).sqrt(),
            "marginal variance {v_exact} vs {sigma_sq}"
        );
    }

    #[test]
    fn work_homodyne_matches_closed_form() {
        for nbar in [16.0, 100.0] {
            let opt = homodyne::optimize(nbar).unwrap();
            let est =
                estimate_work_homodyne(nbar, opt.xi, opt.epsilon, 1_000_000, SEED, 4).unwrap();
            let z = est.z_score(opt.w_max);
            assert!(
                z.abs() < 4.0,
                "nbar = {nbar}: {} +- {} vs {} (z {z})",
                est.mean,
                est.std_error,
                opt.w_max
            );
        }
    }

    #[test]
    fn work_homodyne_zero_oscillator_is_exact_zero() {
        let est = estimate_work_homodyne(20.0, 0.0, 0.1, 10_000, SEED, 2).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn std_error_scales_as_root_n() {
        let opt = homodyne::optimize(100.0).unwrap();
        let a = estimate_work_homodyne(100.0, opt.xi, opt.epsilon, 100_000, SEED, 4).unwrap();
        let b = estimate_work_homodyne(100.0, opt.xi, opt.epsilon, 200_000, SEED, 4).unwrap();
        let ratio = b.std_error / a.std_error;
        let ideal = 1.0 / 2f64.sqrt();
        assert!(
            (ratio - ideal).abs() < 0.2 * ideal,
            "se ratio {ratio} vs {ideal}"
        );
    }

    #[test]
    fn deterministic_across_worker_counts_and_seeds() {
        let opt = homodyne::optimize(100.0).unwrap();
        let a = estimate_work_homodyne(100.0, opt.xi, opt.epsilon, 100_000, 7, 1).unwrap();
        let b = estimate_work_homodyne(100.0, opt.xi, opt.epsilon, 100_000, 7, 3).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = estimate_work_homodyne(100.0, opt.xi, opt.epsilon, 100_000, 8, 3).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());

        let mi_a = estimate_mutual_information(
            &MiScheme::Photocount {
                nbar: 5.0,
                kappa_sq: 0.8,
            },
            50_000,
            11,
            1,
        )
        .unwrap();
        let mi_b = estimate_mutual_information(
            &MiScheme::Photocount {
                nbar: 5.0,
                kappa_sq: 0.8,
            },
            50_000,
            11,
            4,
        )
        .unwrap();
        assert_eq!(mi_a.estimate.mean.to_bits(), mi_b.estimate.mean.to_bits());
    }

    #[test]
    fn work_photocount_matches_closed_form() {
        let closed = crate::photocount::average_work(20.0, 0.75).unwrap();
        let est = estimate_work_photocount(20.0, 0.75, 1_000_000, SEED, 4).unwrap();
        let z = est.z_score(closed);
        assert!(
            z.abs() < 4.0,
            "{} +- {} vs {closed} (z {z})",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn work_sign_matches_closed_form() {
        let nbar = 100.0;
        let opt = coarse::optimize_sign(nbar).unwrap();
        let closed = coarse::sign_work(nbar, opt.xi, opt.epsilon).unwrap().net;
        let est = estimate_work_sign(nbar, opt.xi, opt.epsilon, 1_000_000, SEED, 4).unwrap();
        let z = est.z_score(closed);
        assert!(
            z.abs() < 4.0,
            "{} +- {} vs {closed} (z {z})",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn work_coarse_matches_closed_form() {
        let (nbar, xi, epsilon) = (100.0, 5.0, 0.1);
        let sd = HomodyneStats::new(nbar, xi, epsilon)
            .unwrap()
            .sigma_dn_sq
            .sqrt();
        let r = sd / 2.0;
        let config = coarse::CoarseGrainConfig::new(coarse::Resolution::Width(r), None).unwrap();
        let closed = coarse::coarse_work(nbar, xi, epsilon, &config).unwrap();
        let est = estimate_work_coarse(nbar, xi, epsilon, r, 1_000_000, SEED, 4).unwrap();
        let z = est.z_score(closed);
        assert!(
            z.abs() < 4.0,
            "{} +- {} vs {closed} (z {z})",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn work_coarse_single_block_is_pure_cost() {
        let est = estimate_work_coarse(20.0, 2.0, 0.2, 1e9, 10_000, SEED, 2).unwrap();
        assert_eq!(est.mean, -2.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mi_photocount_matches_summation() {
        let closed = crate::photocount::mutual_information_photocount(20.0, 0.75).unwrap();
        let report = estimate_mutual_information(
            &MiScheme::Photocount {
                nbar: 20.0,
                kappa_sq: 0.75,
            },
            1_000_000,
            SEED,
            4,
        )
        .unwrap();
        let window = 4.0 * report.estimate.std_error + report.bias_bound;
        assert!(
            (report.estimate.mean - closed).abs() < window,
            "{} +- {} (bias {}) vs {closed}",
            report.estimate.mean,
            report.estimate.std_error,
            report.bias_bound
        );
    }

    #[test]
    fn mi_photocount_degenerate_record_is_zero() {
        let report = estimate_mutual_information(
            &MiScheme::Photocount {
                nbar: 20.0,
                kappa_sq: 1.0,
            },
            20_000,
            SEED,
            2,
        )
        .unwrap();
        assert_eq!(report.estimate.mean, 0.0);
    }

    #[test]
    fn record_entropy_photocount_matches_thermal_form() {
        let closed = crate::thermo::entropy(2.0).unwrap();
        let report = estimate_record_entropy_photocount(20.0, 0.9, 1_000_000, SEED, 4).unwrap();
        let window = 4.0 * report.estimate.std_error + report.bias_bound;
        assert!(
            (report.estimate.mean - closed).abs() < window,
            "{} +- {} (bias {}) vs {closed}",
            report.estimate.mean,
            report.estimate.std_error,
            report.bias_bound
        );
    }

    #[test]
    fn mi_sign_matches_binned_quadrature() {
        let nbar = 100.0;
        let opt = coarse::optimize_sign(nbar).unwrap();
        let binning = SignBinning::default();
        let reference = sign_binned_mi_reference(nbar, opt.xi, opt.epsilon, &binning).unwrap();
        // binning discards information relative to the unbinned record
        let unbinned = coarse::sign_mutual_information(nbar, opt.xi, opt.epsilon).unwrap();
        assert!(reference <= unbinned + 1e-9);
        assert!(reference > 0.95 * unbinned, "40 bins should be near-lossless");

        let report = estimate_mutual_information(
            &MiScheme::Sign {
                nbar,
                xi: opt.xi,
                epsilon: opt.epsilon,
                binning,
            },
            1_000_000,
            SEED,
            4,
        )
        .unwrap();
        let window = 4.0 * report.estimate.std_error + report.bias_bound;
        assert!(
            (report.estimate.mean - reference).abs() < window,
            "{} +- {} (bias {}) vs {reference}",
            report.estimate.mean,
            report.estimate.std_error,
            report.bias_bound
        );
    }

    #[test]
    fn record_entropy_sign_is_two_bits() {
        let report = estimate_record_entropy_sign(100.0, 8.0, 0.1, 1_000_000, SEED, 4).unwrap();
        let window = 4.0 * report.estimate.std_error + report.bias_bound;
        assert!(
            (report.estimate.mean - 4f64.ln()).abs() < window,
            "{} vs ln 4",
            report.estimate.mean
        );
        assert!(!report.undersampled);
    }

    #[test]
    fn mi_homodyne_matches_closed_form() {
        let (nbar, xi, epsilon) = (100.0, 5.0, 0.1);
        let closed = homodyne::mutual_information(nbar, xi, epsilon).unwrap();
        let est = estimate_mi_homodyne(nbar, xi, epsilon, 400_000, SEED, 4).unwrap();
        let z = est.z_score(closed);
        assert!(
            z.abs() < 4.0,
            "{} +- {} vs {closed} (z {z})",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn record_entropy_homodyne_matches_closed_form() {
        let (nbar, xi, epsilon) = (100.0, 5.0, 0.1);
        let closed = homodyne::detector_entropy(nbar, xi, epsilon).unwrap();
        let est = estimate_record_entropy_homodyne(nbar, xi, epsilon, 400_000, SEED, 4).unwrap();
        let z = est.z_score(closed);
        assert!(
            z.abs() < 4.0,
            "{} +- {} vs {closed} (z {z})",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn welford_matches_two_pass() {
        let data = [1.0, 2.5, -0.5, 4.0, 4.0, 0.25];
        let mut acc = Welford::default();
        for &x in &data {
            acc.push(x);
        }
        let est = acc.estimate();
        let n = data.len() as f64;
        let mean: f64 = data.iter().sum::<f64>() / n;
        let var: f64 = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert_relative_eq!(est.mean, mean, epsilon = 1e-14);
        assert_relative_eq!(est.std_error, (var / n).sqrt(), epsilon = 1e-14);
        // order-independent merge in fixed sequence
        let mut a = Welford::default();
        let mut b = Welford::default();
        for &x in &data[..3] {
            a.push(x);
        }
        for &x in &data[3..] {
            b.push(x);
        }
        let merged = a.merge(b).estimate();
        assert_relative_eq!(merged.mean, mean, epsilon = 1e-14);
        assert_relative_eq!(merged.std_error, (var / n).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(estimate_work_homodyne(10.0, 1.0, 0.1, 1000, 1, 0).is_err());
        assert!(estimate_work_homodyne(10.0, 1.0, 0.1, 0, 1, 2).is_err());
        assert!(estimate_work_homodyne(10.0, 1.0, 1.5, 1000, 1, 2).is_err());
        assert!(estimate_work_coarse(10.0, 1.0, 0.1, 0.0, 1000, 1, 2).is_err());
        assert!(photocount_record_chi_square(10.0, 1.0, 10, 1000, 1, 2).is_err());
    }
}
