//! Physical constants (CODATA 2018 / SI exact values).
//!
//! These appear only where the crate touches laboratory units (temperature in
//! kelvin, trap frequencies in rad/s); the dynamics itself is done with ħ = 1.

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant [J/K] (exact in the 2019 SI).
pub const KB: f64 = 1.380_649e-23;
