//! Work extraction from a single mode of thermal light, and what measuring
//! it costs.
//!
//! The library covers one physical story end to end, in units of the mode
//! quantum (hbar omega = 1, k_B = 1, entropies in nats):
//!
//! - [`thermo`]: occupation/temperature/entropy bookkeeping of one
//!   harmonic mode, isothermal frequency sweeps, and full compression.
//! - [`reversible`]: the reversible ceiling when N modes share two
//!   occupations, with the explicit adiabatic-isothermal stroke ledger.
//! - [`photocount`]: tap a small fraction onto a photon counter, keep the
//!   conditional state, and extract its permutation work.
//! - [`homodyne`]: tap onto a balanced eight-port homodyne layout and
//!   displace the transmitted beam by the linear estimate; includes the
//!   exact two-parameter optimum and the information ledger.
//! - [`coarse`]: the same record read at finite resolution, down to the
//!   two-bit sign record and its closed forms.
//! - [`erasure`]: detector heating, record-erasure heat, temperature
//!   ceilings for net gain, and the optimal three-step detector reset.
//! - [`ergotropy`], [`nsm`]: finite-dimensional ergotropy/passivity, the
//!   no-go for non-selective measurement on the split beam, and the
//!   measurement-driven four-stroke cycle with its corrected efficiency
//!   bound.
//! - [`mc`]: seeded Monte Carlo over the physical chains, the independent
//!   oracle for every closed form above.
//!
//! All estimators and solvers are deterministic given their seeds, and
//! inputs are validated at the public boundary with [`Error`].

pub mod coarse;
pub mod erasure;
pub mod ergotropy;
pub mod error;
pub mod homodyne;
pub mod mc;
pub mod nsm;
pub mod numeric;
pub mod photocount;
pub mod reversible;
pub mod thermo;

pub use error::{Error, Result};

// Matrix types appear in the public API (density matrices, Kraus sets);
// re-export the crate so downstream users stay on the same version.
pub use nalgebra;
