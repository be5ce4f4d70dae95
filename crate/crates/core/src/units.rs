//! Unit conventions and physical constants.
//!
//! Angular frequencies are in rad/μs, times in μs, lengths in μm, and ħ = 1,
//! so an interaction energy `V` is stored as `V/ħ`. A frequency quoted in MHz
//! (cycles per μs) becomes rad/μs after multiplication by 2π.

use std::f64::consts::TAU;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a ⁸⁷Rb atom, kg.
pub const RB87_MASS: f64 = 86.909_180_527 * ATOMIC_MASS_UNIT;

/// Hyperfine splitting of the ⁸⁷Rb ground state, 6.834 682 61 GHz, in rad/μs.
pub const RB87_HYPERFINE: f64 = TAU * 6_834.682_61;

/// C₆/ħ of the ⁸⁷Rb |97S₁/₂⟩ pair state (C₆ = h × 39.5 THz·μm⁶), in rad/μs·μm⁶.
pub const C6_RB87_97S: f64 = TAU * 3.95e7;

/// Converts a frequency in MHz into an angular frequency in rad/μs.
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Converts an angular frequency in rad/μs back into MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU
}

/// One-dimensional r.m.s. thermal speed √(k_B T / m) in μm/μs (numerically m/s).
pub fn thermal_speed(temperature_uk: f64, mass_kg: f64) -> f64 {
    (BOLTZMANN * temperature_uk * 1e-6 / mass_kg).sqrt()
}
