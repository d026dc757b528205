//! Reversible work extraction from one hot mode using a bank of colder modes.
//!
//! One mode at occupation nbar is mixed entropy-conservingly with N-1 modes at
//! nbar_c < nbar until all N modes share a common occupation nbar_f fixed by
//!
//!   N S(nbar_f) = S(nbar) + (N - 1) S(nbar_c),
//!
//! and the energy difference is extracted as work,
//!
//!   W = omega [ nbar + (N - 1) nbar_c - N nbar_f ].
//!
//! The same extraction can be run as explicit engine strokes: an adiabatic
//! frequency shift takes each mode to the common final temperature, then an
//! isothermal sweep returns its frequency to omega while the occupation
//! relaxes to nbar_f. The stroke ledger exposes the per-stroke work and heat;
//! reversibility shows up as the hot and cold heats cancelling exactly.

use crate::error::{check_nonneg, check_pos, Error, Result};
use crate::numeric::bisect;
use crate::thermo::{entropy_raw, free_energy};

/// One hot mode plus a bank of identical colder modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEnsemble {
    modes: u32,
    nbar_hot: f64,
    nbar_cold: f64,
}

impl ModeEnsemble {
    /// `modes` counts all modes including the hot one, so `modes >= 2`.
    pub fn new(modes: u32, nbar_hot: f64, nbar_cold: f64) -> Result<Self> {
        if modes < 2 {
            return Err(Error::invalid(format!(
                "ensemble needs at least 2 modes, got {modes}"
            )));
        }
        check_pos("nbar_hot", nbar_hot)?;
        check_nonneg("nbar_cold", nbar_cold)?;
        if nbar_cold >= nbar_hot {
            return Err(Error::invalid(format!(
                "nbar_cold = {nbar_cold} must be below nbar_hot = {nbar_hot}"
            )));
        }
        Ok(Self {
            modes,
            nbar_hot,
            nbar_cold,
        })
    }

    pub fn modes(&self) -> u32 {
        self.modes
    }

    pub fn nbar_hot(&self) -> f64 {
        self.nbar_hot
    }

    pub fn nbar_cold(&self) -> f64 {
        self.nbar_cold
    }
}

/// Result of a full reversible extraction at unit frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversibleOutcome {
    /// Common occupation after mixing.
    pub nbar_final: f64,
    /// Extracted work in units of omega.
    pub work: f64,
    /// Work over the hot mode's initial energy, W / nbar_hot.
    pub efficiency: f64,
}

/// Solve N S(x) = S(nbar) + (N-1) S(nbar_c) for the common occupation.
///
/// The left side is strictly increasing in x and the solution is pinched
/// between nbar_c and nbar, so bisection on that bracket always lands.
pub fn solve_final_occupancy(ensemble: &ModeEnsemble) -> Result<f64> {
    let n = f64::from(ensemble.modes);
    let target = entropy_raw(ensemble.nbar_hot) + (n - 1.0) * entropy_raw(ensemble.nbar_cold);
    bisect(
        "entropy balance",
        |x| n * entropy_raw(x) - target,
        ensemble.nbar_cold,
        ensemble.nbar_hot,
    )
}

/// Run the extraction and report occupation, work, and efficiency.
pub fn extract(ensemble: &ModeEnsemble) -> Result<ReversibleOutcome> {
    let nbar_final = solve_final_occupancy(ensemble)?;
    let n = f64::from(ensemble.modes);
    let work = ensemble.nbar_hot + (n - 1.0) * ensemble.nbar_cold - n * nbar_final;
    Ok(ReversibleOutcome {
        nbar_final,
        work,
        efficiency: work / ensemble.nbar_hot,
    })
}

/// Per-stroke bookkeeping for the explicit engine protocol at frequency
/// `omega`. Cold-mode entries are totals over all N-1 cold modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeLedger {
    /// Frequency reached by the hot mode's adiabatic stroke.
    pub omega_hot: f64,
    /// Frequency reached by each cold mode's adiabatic stroke
    /// (infinite when the cold modes start in the vacuum).
    pub omega_cold: f64,
    /// Common temperature of the isothermal strokes.
    pub theta_final: f64,
    pub work_adiabatic_hot: f64,
    pub work_adiabatic_cold: f64,
    pub work_isothermal_hot: f64,
    pub work_isothermal_cold: f64,
    /// Heat absorbed by the hot mode during its isothermal stroke (negative).
    pub heat_hot: f64,
    /// Heat absorbed by the cold modes during theirs (positive).
    pub heat_cold: f64,
    /// Total work done on the ensemble; minus the extracted work.
    pub work_total: f64,
}

/// Decompose the reversible extraction into engine strokes.
///
/// Each mode is first shifted adiabatically (occupation frozen, work
/// nbar * d omega) to the frequency at which its temperature equals the
/// common final temperature omega / ln(1 + 1/nbar_f), then swept
/// isothermally back to `omega` while relaxing to nbar_f.
pub fn strokes(ensemble: &ModeEnsemble, omega: f64) -> Result<StrokeLedger> {
    check_pos("omega", omega)?;
    let nbar_final = solve_final_occupancy(ensemble)?;
    let n_cold = f64::from(ensemble.modes) - 1.0;
    let nh = ensemble.nbar_hot;
    let nc = ensemble.nbar_cold;
    let log_f = (1.0 / nbar_final).ln_1p();
    let theta_final = omega / log_f;

    let omega_hot = omega * (1.0 / nh).ln_1p() / log_f;
    let work_adiabatic_hot = nh * (omega_hot - omega);
    let work_isothermal_hot = free_energy(nbar_final, omega)? - free_energy(nh, omega_hot)?;
    let heat_hot = theta_final * (entropy_raw(nbar_final) - entropy_raw(nh));

    // Vacuum cold modes sit at zero temperature for any frequency: the
    // adiabatic stroke formally runs to infinite frequency but carries no
    // quanta, so it costs nothing, and the isothermal stroke starts from
    // F = 0.
    let (omega_cold, work_adiabatic_cold, work_isothermal_cold) = if nc == 0.0 {
        let w_iso = n_cold * free_energy(nbar_final, omega)?;
        (f64::INFINITY, 0.0, w_iso)
    } else {
        let w_c = omega * (1.0 / nc).ln_1p() / log_f;
        let w_ad = n_cold * nc * (w_c - omega);
        let w_iso = n_cold * (free_energy(nbar_final, omega)? - free_energy(nc, w_c)?);
        (w_c, w_ad, w_iso)
    };
    let heat_cold = n_cold * theta_final * (entropy_raw(nbar_final) - entropy_raw(nc));

    let work_total =
        work_adiabatic_hot + work_adiabatic_cold + work_isothermal_hot + work_isothermal_cold;

    Ok(StrokeLedger {
        omega_hot,
        omega_cold,
        theta_final,
        work_adiabatic_hot,
        work_adiabatic_cold,
        work_isothermal_hot,
        work_isothermal_cold,
        heat_hot,
        heat_cold,
        work_total,
    })
}

/// Closed-form efficiency in the limit of infinitely many cold modes,
///
///   eta = 1 - (nbar_c / nbar) [1 + ln(nbar / nbar_c)].
///
/// Derived for classical occupations, so it is accurate only when
/// nbar_c >> 1; for cold modes near the vacuum it overestimates the true
/// limit. nbar_c = 0 gives eta = 1 exactly.
pub fn efficiency_infinite_modes(nbar_hot: f64, nbar_cold: f64) -> Result<f64> {
    check_pos("nbar_hot", nbar_hot)?;
    check_nonneg("nbar_cold", nbar_cold)?;
    if nbar_cold >= nbar_hot {
        return Err(Error::invalid(format!(
            "nbar_cold = {nbar_cold} must be below nbar_hot = {nbar_hot}"
        )));
    }
    if nbar_cold == 0.0 {
        return Ok(1.0);
    }
    let r = nbar_hot / nbar_cold;
    Ok(1.0 - (1.0 + r.ln()) / r)
}
