//! Equilibrium thermodynamics of a single bosonic mode.
//!
//! Conventions used everywhere in this crate: hbar = k_B = 1, so a mode of
//! frequency omega with mean occupation nbar has energy E = omega * nbar,
//! entropy in nats, and temperature theta = k_B T in the same energy units.
//! The thermal (geometric) state with mean occupation nbar has
//!
//!   S(nbar)     = (nbar + 1) ln(nbar + 1) - nbar ln(nbar)
//!   theta       = omega / ln(1 + 1/nbar)
//!   Z           = nbar + 1
//!   F           = -theta ln(nbar + 1)
//!
//! The generalized force conjugate to the frequency is the occupation itself,
//! dW = nbar d(omega), which is what makes isothermal frequency sweeps the
//! work strokes of every engine in this crate.

use crate::error::{check_nonneg, check_pos, Result};

/// Entropy of a thermal mode with mean occupation `nbar`, in nats.
///
/// Exact limit S(0) = 0. The ln_1p form keeps the nbar -> 0 behaviour
/// S -> nbar (1 - ln nbar) accurate at machine precision, so callers may
/// evaluate arbitrarily close to the vacuum.
pub fn entropy(nbar: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    Ok(entropy_raw(nbar))
}

/// Entropy without the domain check, for internal hot loops.
/// Invariant: nbar >= 0.
pub(crate) fn entropy_raw(nbar: f64) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * nbar.ln_1p() - nbar * nbar.ln()
}

/// d S / d nbar = ln(1 + 1/nbar). Diverges at the vacuum, hence nbar > 0.
pub fn entropy_derivative(nbar: f64) -> Result<f64> {
    check_pos("nbar", nbar)?;
    Ok((1.0 / nbar).ln_1p())
}

/// Temperature theta = omega / ln(1 + 1/nbar) of a thermal mode.
///
/// The vacuum is the zero-temperature limit; `temperature(0, omega)` returns
/// exactly 0.
pub fn temperature(nbar: f64, omega: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_pos("omega", omega)?;
    if nbar == 0.0 {
        return Ok(0.0);
    }
    Ok(omega / (1.0 / nbar).ln_1p())
}

/// Mean occupation of a mode of frequency `omega` at temperature `theta`.
/// Inverse of [`temperature`]; theta = 0 maps to the vacuum.
pub fn nbar_of_temperature(theta: f64, omega: f64) -> Result<f64> {
    check_nonneg("theta", theta)?;
    check_pos("omega", omega)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / theta).exp_m1())
}

/// Partition function Z = nbar + 1.
pub fn partition_function(nbar: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    Ok(nbar + 1.0)
}

/// Helmholtz free energy F = -theta ln Z = -omega ln(1 + nbar) / ln(1 + 1/nbar).
/// F(0) = 0 by continuity.
pub fn free_energy(nbar: f64, omega: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_pos("omega", omega)?;
    if nbar == 0.0 {
        return Ok(0.0);
    }
    Ok(-omega * nbar.ln_1p() / (1.0 / nbar).ln_1p())
}

/// Mean energy E = omega nbar.
pub fn mean_energy(nbar: f64, omega: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    check_pos("omega", omega)?;
    Ok(omega * nbar)
}

/// Generalized force conjugate to the mode frequency, (dF/d omega)_theta = nbar.
pub fn pressure(nbar: f64) -> Result<f64> {
    check_nonneg("nbar", nbar)?;
    Ok(nbar)
}

/// Outcome of an isothermal frequency sweep omega1 -> omega2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsothermalStep {
    /// Occupation after re-equilibrating at the same temperature.
    pub nbar_final: f64,
    /// Work done on the mode, W = F(nbar2, omega2) - F(nbar1, omega1).
    pub work: f64,
    /// Heat absorbed from the bath, Q = theta (S2 - S1).
    pub heat: f64,
}

/// Quasistatic isothermal sweep of the mode frequency while coupled to a bath
/// at the mode's own temperature. First law: work + heat = E2 - E1.
pub fn isothermal_work(nbar: f64, omega1: f64, omega2: f64) -> Result<IsothermalStep> {
    check_pos("nbar", nbar)?;
    check_pos("omega1", omega1)?;
    check_pos("omega2", omega2)?;
    let theta = temperature(nbar, omega1)?;
    let nbar_final = nbar_of_temperature(theta, omega2)?;
    let work = free_energy(nbar_final, omega2)? - free_energy(nbar, omega1)?;
    let heat = theta * (entropy_raw(nbar_final) - entropy_raw(nbar));
    Ok(IsothermalStep {
        nbar_final,
        work,
        heat,
    })
}

/// Work and heat for the complete isothermal emptying of a mode,
/// omega -> infinity at fixed temperature (nbar -> 0).
///
/// W = theta ln(1 + nbar) and Q = -theta S(nbar); the pair satisfies
/// W + Q = -omega nbar identically (all extracted heat minus the stored
/// energy becomes compression work).
pub fn compress_to_infinity(nbar: f64, omega: f64) -> Result<(f64, f64)> {
    check_nonneg("nbar", nbar)?;
    check_pos("omega", omega)?;
    if nbar == 0.0 {
        return Ok((0.0, 0.0));
    }
    let theta = omega / (1.0 / nbar).ln_1p();
    let work = theta * nbar.ln_1p();
    let heat = -theta * entropy_raw(nbar);
    Ok((work, heat))
}

/// A single thermal mode: occupation plus frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorMode {
    nbar: f64,
    omega: f64,
}

impl OscillatorMode {
    pub fn new(nbar: f64, omega: f64) -> Result<Self> {
        check_nonneg("nbar", nbar)?;
        check_pos("omega", omega)?;
        Ok(Self { nbar, omega })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn entropy(&self) -> f64 {
        entropy_raw(self.nbar)
    }

    pub fn temperature(&self) -> f64 {
        if self.nbar == 0.0 {
            0.0
        } else {
            self.omega / (1.0 / self.nbar).ln_1p()
        }
    }

    pub fn partition_function(&self) -> f64 {
        self.nbar + 1.0
    }

    pub fn free_energy(&self) -> f64 {
        if self.nbar == 0.0 {
            0.0
        } else {
            -self.omega * self.nbar.ln_1p() / (1.0 / self.nbar).ln_1p()
        }
    }

    pub fn mean_energy(&self) -> f64 {
        self.omega * self.nbar
    }
}
