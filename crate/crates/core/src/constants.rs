//! CODATA 2018 constants in SI units.

use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Dipole moment unit e·a0 in C·m.
pub const EA0: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

/// Angular frequency of one wavenumber (cm⁻¹).
pub const INVCM_TO_RAD_S: f64 = 2.0 * PI * SPEED_OF_LIGHT * 100.0;

pub const THZ_TO_RAD_S: f64 = 2.0 * PI * 1e12;

/// Angular frequency (rad/s) of light with the given vacuum wavelength.
pub fn wavelength_to_omega(wavelength_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength_m
}

/// Vacuum wavelength (m) of light with angular frequency `omega`.
pub fn omega_to_wavelength(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}
