//! AC Stark shifts and intensity calibration from a measured differential
//! shift.
//!
//! The shift of |i⟩ is
//! δ_i = E²/(4ħ²) Σ_k ω_ik |⟨i|r·ε|k⟩|² / (ω_ik² − ω²)
//! with ω_ik = (E_k − E_i)/ħ, summed over every hyperfine state of the
//! intermediate levels. The counter-rotating term is kept. The matrix
//! element enters squared.

use crate::atomdata::{HyperfineState, SpeciesData};
use crate::constants::{EA0, HBAR};
use crate::couplings::{dot_raw, Ket};
use crate::error::{Error, Result};
use crate::scattering::{Intermediates, LaserDrive, ScatterConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarkResult {
    /// Shift of the first state, rad/s.
    pub delta_d: f64,
    /// Shift of the second state, rad/s.
    pub delta_s: f64,
    /// `delta_d - delta_s`.
    pub differential: f64,
}

pub(crate) fn stark_raw(species: &SpeciesData, inter: &Intermediates, i: Ket, drive: &LaserDrive) -> Result<f64> {
    let ei = species.level_at(i.level).energy;
    let eps = drive.polarization.spherical_components();
    let w = drive.omega;
    let mut sum = 0.0;
    for (lvl, ek, kets) in &inter.levels {
        if species.reduced_element_idx(i.level, *lvl) == 0.0 {
            continue;
        }
        let w_ik = ek - ei;
        inter.check("Stark", w_ik.abs() - w)?;
        let denom = w_ik * w_ik - w * w;
        for &k in kets {
            sum += w_ik * dot_raw(species, i, k, &eps).norm_sqr() / denom;
        }
    }
    Ok(drive.field * drive.field / (4.0 * HBAR * HBAR) * EA0 * EA0 * sum)
}

/// Light shift of `state` in rad/s.
pub fn stark_shift(species: &SpeciesData, state: &HyperfineState, drive: &LaserDrive, cfg: &ScatterConfig) -> Result<f64> {
    let inter = Intermediates::new(species, cfg)?;
    stark_raw(species, &inter, Ket::resolve(species, state)?, drive)
}

/// Both shifts and their difference δ_d − δ_s.
pub fn stark_pair(
    species: &SpeciesData,
    d: &HyperfineState,
    s: &HyperfineState,
    drive: &LaserDrive,
    cfg: &ScatterConfig,
) -> Result<StarkResult> {
    let inter = Intermediates::new(species, cfg)?;
    let delta_d = stark_raw(species, &inter, Ket::resolve(species, d)?, drive)?;
    let delta_s = stark_raw(species, &inter, Ket::resolve(species, s)?, drive)?;
    Ok(StarkResult {
        delta_d,
        delta_s,
        differential: delta_d - delta_s,
    })
}

/// δ_d − δ_s in rad/s.
pub fn differential_stark(
    species: &SpeciesData,
    d: &HyperfineState,
    s: &HyperfineState,
    drive: &LaserDrive,
    cfg: &ScatterConfig,
) -> Result<f64> {
    Ok(stark_pair(species, d, s, drive, cfg)?.differential)
}

/// Field amplitude (V/m) that produces the measured differential shift.
/// The amplitude stored in `drive` is ignored.
pub fn field_from_stark(
    species: &SpeciesData,
    d: &HyperfineState,
    s: &HyperfineState,
    drive: &LaserDrive,
    measured: f64,
    cfg: &ScatterConfig,
) -> Result<f64> {
    if !measured.is_finite() {
        return Err(Error::InvalidArgument(format!("measured shift {measured} is not finite")));
    }
    let unit = stark_pair(species, d, s, &drive.with_field(1.0)?, cfg)?;
    let scale = unit.delta_d.abs() + unit.delta_s.abs();
    if unit.differential == 0.0 || unit.differential.abs() <= 1e-12 * scale {
        return Err(Error::ZeroSensitivity);
    }
    if measured == 0.0 {
        return Ok(0.0);
    }
    if measured.signum() != unit.differential.signum() {
        return Err(Error::SignMismatch {
            measured,
            predicted: unit.differential,
        });
    }
    Ok((measured / unit.differential).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::BeamGeometry;
    use crate::constants::wavelength_to_omega;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn st(s: &str) -> HyperfineState {
        HyperfineState::parse(s).unwrap()
    }

    fn setup() -> (SpeciesData, ScatterConfig, LaserDrive) {
        let s = SpeciesData::builtin("ba137").unwrap();
        let cfg = ScatterConfig::for_species(&s);
        let d = LaserDrive::from_geometry(wavelength_to_omega(674e-9), 2e5, BeamGeometry::new(FRAC_PI_2, 0.045)).unwrap();
        (s, cfg, d)
    }

    #[test]
    fn zero_field_and_self_difference() {
        let (s, cfg, d) = setup();
        let a = st("5D5/2:1,1");
        assert_eq!(stark_shift(&s, &a, &d.with_field(0.0).unwrap(), &cfg).unwrap(), 0.0);
        assert_eq!(differential_stark(&s, &a, &a, &d, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn antisymmetric_and_quadratic() {
        let (s, cfg, d) = setup();
        let a = st("5D5/2:1,1");
        let b = st("6S1/2:1,-1");
        let ab = differential_stark(&s, &a, &b, &d, &cfg).unwrap();
        let ba = differential_stark(&s, &b, &a, &d, &cfg).unwrap();
        assert_eq!(ab, -ba);
        let ab2 = differential_stark(&s, &a, &b, &d.with_field(2.0 * d.field).unwrap(), &cfg).unwrap();
        assert!((ab2 / ab - 4.0).abs() < 1e-12);
    }

    #[test]
    fn red_detuned_shift_is_positive_by_formula() {
        let (s, cfg, d) = setup();
        // all intermediates lie above D5/2 and S1/2 with ω_ik > ω at 674 nm
        assert!(stark_shift(&s, &st("5D5/2:1,0"), &d, &cfg).unwrap() > 0.0);
        assert!(stark_shift(&s, &st("6S1/2:1,0"), &d, &cfg).unwrap() > 0.0);
    }

    #[test]
    fn calibration_round_trip_and_errors() {
        let (s, cfg, d) = setup();
        let a = st("5D5/2:1,1");
        let b = st("6S1/2:1,-1");
        let measured = differential_stark(&s, &a, &b, &d, &cfg).unwrap();
        let e = field_from_stark(&s, &a, &b, &d, measured, &cfg).unwrap();
        assert!((e / d.field - 1.0).abs() < 1e-10);
        assert_eq!(field_from_stark(&s, &a, &b, &d, 0.0, &cfg).unwrap(), 0.0);
        assert!(matches!(
            field_from_stark(&s, &a, &b, &d, -measured, &cfg),
            Err(Error::SignMismatch { .. })
        ));
        assert!(matches!(field_from_stark(&s, &a, &a, &d, measured, &cfg), Err(Error::ZeroSensitivity)));
    }

    #[test]
    fn resonance_guard() {
        let (s, cfg, d) = setup();
        let w0 = s.transition_frequency("5D5/2", "6P3/2").unwrap();
        let near = d.with_omega(w0 + 2.0 * PI * 1e6).unwrap();
        assert!(matches!(stark_shift(&s, &st("5D5/2:1,0"), &near, &cfg), Err(Error::Resonance { .. })));
    }
}
