//! Simulation of an adiabatic red-sideband protocol that maps the phonon-number
//! statistics of a trapped-ion crystal onto collective spin (Dicke) excitations,
//! together with the Fisher-information machinery needed to score the mapping as
//! a thermometer or displacement sensor.
//!
//! The model is a collective (anti-)Jaynes–Cummings Hamiltonian
//!
//! ```text
//! H(t)/ħ = Δ(t) Sz + λ(t) (S₊ F(n̂) a + S₋ a† F(n̂))
//! ```
//!
//! for a pseudospin S = N/2 coupled to one vibrational mode. Total excitation
//! number M = l + n is conserved, so the dynamics splits into tridiagonal
//! sectors of dimension min(M, 2S) + 1; everything downstream (populations,
//! Fisher information, fidelities, sweeps) is built on top of those sectors.
//!
//! Conventions used throughout:
//! * frequencies are angular (rad/s); CLI-level unit conversion happens at the
//!   boundary, not here,
//! * temperature enters via the dimensionless ratio x = ħω/(k_B T),
//! * Dicke levels are indexed l = 0..2S with Sz eigenvalue −S + l, and sector
//!   bases are ordered by ascending l.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod metrology;
pub mod motion;
pub mod protocol;

pub use error::{Error, Result};
pub use hilbert::{JcModel, PhysicalParams, SectorBasis, Spin};
pub use motion::{MotionDistribution, MotionKind, TemperaturePoint};
pub use dynamics::{DickeResponse, Schedule, SectorState};
pub use protocol::{
    AddressabilityReport, ExperimentConfig, MotionSpec, ResponseCache, SweepAxis, SweepResult,
};
