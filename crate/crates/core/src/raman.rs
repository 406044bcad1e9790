//! Two-photon stimulated Raman Rabi frequencies.
//!
//! Ω = |e²E₁E₂/(4ħ²) Σ_k (⟨b|r·ε₁*|k⟩⟨k|r·ε₂|a⟩/Δ_Λ + ⟨b|r·ε₁|k⟩⟨k|r·ε₂*|a⟩/Δ_V)|
//! with Δ_Λ = (E_k − E_a)/ħ − ω₁ and Δ_V = (E_k − E_b)/ħ + ω₁. Both
//! denominators use the first drive's frequency; the difference between the
//! two frequencies is a qubit splitting and is neglected.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::atomdata::{HyperfineState, SpeciesData};
use crate::constants::{EA0, HBAR};
use crate::couplings::{dot_raw, Ket};
use crate::error::{Error, Result};
use crate::scattering::{Intermediates, LaserDrive, ScatterConfig};

pub(crate) fn raman_raw(
    species: &SpeciesData,
    inter: &Intermediates,
    a: Ket,
    b: Ket,
    drive1: &LaserDrive,
    drive2: &LaserDrive,
) -> Result<f64> {
    let dm = (b.m - a.m).twice();
    if dm.abs() > 4 {
        return Ok(0.0);
    }
    let ea = species.level_at(a.level).energy;
    let eb = species.level_at(b.level).energy;
    let w = drive1.omega;
    let e1 = drive1.polarization.spherical_components();
    let e1c = drive1.polarization.conj().spherical_components();
    let e2 = drive2.polarization.spherical_components();
    let e2c = drive2.polarization.conj().spherical_components();
    let mut sum = Complex64::new(0.0, 0.0);
    for (lvl, ek, kets) in &inter.levels {
        if species.reduced_element_idx(*lvl, a.level) == 0.0 || species.reduced_element_idx(*lvl, b.level) == 0.0 {
            continue;
        }
        let d_lambda = ek - ea - w;
        let d_v = ek - eb + w;
        inter.check("Raman Λ", d_lambda)?;
        inter.check("Raman V", d_v)?;
        for &k in kets {
            sum += dot_raw(species, b, k, &e1c) * dot_raw(species, k, a, &e2) / d_lambda
                + dot_raw(species, b, k, &e1) * dot_raw(species, k, a, &e2c) / d_v;
        }
    }
    Ok((EA0 * EA0 * drive1.field * drive2.field / (4.0 * HBAR * HBAR) * sum).norm())
}

/// Raman Rabi frequency (rad/s) between `a` and `b`. Forbidden pairs give 0.
pub fn raman_rabi(
    species: &SpeciesData,
    a: &HyperfineState,
    b: &HyperfineState,
    drive1: &LaserDrive,
    drive2: &LaserDrive,
    cfg: &ScatterConfig,
) -> Result<f64> {
    let inter = Intermediates::new(species, cfg)?;
    raman_raw(species, &inter, Ket::resolve(species, a)?, Ket::resolve(species, b)?, drive1, drive2)
}

/// Duration π/Ω of a full population transfer.
pub fn pi_time(rabi: f64) -> Result<f64> {
    if !(rabi > 0.0) || !rabi.is_finite() {
        return Err(Error::InvalidArgument(format!("Rabi frequency must be positive, got {rabi}")));
    }
    Ok(PI / rabi)
}
