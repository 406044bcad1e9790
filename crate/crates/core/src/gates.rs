//! Scattering-limited gate errors.
//!
//! A single-qubit Raman π-pulse between |q0⟩ and |q1⟩ lasts τ_π = π/Ω. The
//! scatter probability during it is a rate times τ_π; the rate comes from
//! the first (scattering) beam alone. Two-qubit Mølmer–Sørensen errors are
//! the full single-qubit error scaled by 4/η.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rayon::prelude::*;

use crate::angular::{BeamGeometry, SecondBeamGeometry};
use crate::atomdata::{HyperfineState, SpeciesData};
use crate::constants::{omega_to_wavelength, ATOMIC_MASS_UNIT, HBAR, THZ_TO_RAD_S};
use crate::couplings::{kets_of, Ket};
use crate::error::{Error, Result};
use crate::raman::{pi_time, raman_raw};
use crate::scattering::{
    moore_raw, ozeri_raw, Intermediates, LaserDrive, Model, OzeriPhoton, ScatterConfig,
};

/// η = Δk·√(ħ/(2mω)) for an ion of `mass_amu` in a mode of angular frequency
/// `omega_trap`.
pub fn lamb_dicke(mass_amu: f64, omega_trap: f64, delta_k: f64) -> Result<f64> {
    for (name, v) in [("mass", mass_amu), ("motional frequency", omega_trap), ("Δk", delta_k)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(delta_k * (HBAR / (2.0 * mass_amu * ATOMIC_MASS_UNIT * omega_trap)).sqrt())
}

/// Beam arrangement fixing the momentum transfer of the gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MsBeams {
    /// Two beams at right angles, Δk = √2·k.
    #[default]
    Perpendicular,
    /// Counter-propagating pair, Δk = 2k.
    CounterPropagating,
}

impl MsBeams {
    pub fn delta_k(&self, omega_laser: f64) -> f64 {
        let k = 2.0 * PI / omega_to_wavelength(omega_laser);
        match self {
            MsBeams::Perpendicular => SQRT_2 * k,
            MsBeams::CounterPropagating => 2.0 * k,
        }
    }
}

/// The two Raman beams. Beam 1 also sets the scattering rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrivePair {
    pub drive1: LaserDrive,
    pub drive2: LaserDrive,
}

impl DrivePair {
    pub fn new(drive1: LaserDrive, drive2: LaserDrive) -> Self {
        DrivePair { drive1, drive2 }
    }

    /// Equal-field beams at frequency `omega` with the given geometries.
    pub fn from_geometry(omega: f64, field: f64, g1: BeamGeometry, g2: SecondBeamGeometry) -> Result<Self> {
        Ok(DrivePair {
            drive1: LaserDrive::new(omega, field, g1.polarization())?,
            drive2: LaserDrive::new(omega, field, g2.polarization())?,
        })
    }

    /// Both beams perpendicular to the quantization axis with a common
    /// polarization angle.
    pub fn perpendicular(omega: f64, field: f64, gamma: f64) -> Result<Self> {
        Self::from_geometry(
            omega,
            field,
            BeamGeometry::new(FRAC_PI_2, gamma),
            SecondBeamGeometry::new(FRAC_PI_2, gamma),
        )
    }

    pub fn with_field(self, field: f64) -> Result<Self> {
        Ok(DrivePair {
            drive1: self.drive1.with_field(field)?,
            drive2: self.drive2.with_field(field)?,
        })
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Ok(DrivePair {
            drive1: self.drive1.with_omega(omega)?,
            drive2: self.drive2.with_omega(omega)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorVariant {
    /// Γ_q0 into every other fine-structure level, times τ_π.
    Fig4,
    /// ½(Γ′_q0 + Γ′_q1)·τ_π, where Γ′ also counts scatter within the qubit
    /// level except Rayleigh back to the same state.
    Full,
}

/// Precomputed state needed to evaluate many gate errors.
struct Evaluator<'a> {
    species: &'a SpeciesData,
    inter: Intermediates,
}

impl<'a> Evaluator<'a> {
    fn new(species: &'a SpeciesData, cfg: &ScatterConfig) -> Result<Self> {
        Ok(Evaluator {
            species,
            inter: Intermediates::new(species, cfg)?,
        })
    }

    fn finals(&self, i: Ket, include_own_level: bool) -> Result<Vec<Ket>> {
        let init = self.species.level_at(i.level);
        let mut out = Vec::new();
        for level in self.species.levels() {
            if level.l % 2 != init.l % 2 {
                continue;
            }
            let own = level.label == init.label;
            if own && !include_own_level {
                continue;
            }
            for k in kets_of(self.species, &level.label)? {
                if k != i {
                    out.push(k);
                }
            }
        }
        Ok(out)
    }

    fn rate(&self, i: Ket, drive: &LaserDrive, include_own_level: bool, model: Model) -> Result<f64> {
        let basis = [-1, 0, 1].map(|q| crate::angular::Polarization::spherical_basis(q).spherical_components());
        let mut total = 0.0;
        for f in self.finals(i, include_own_level)? {
            total += match model {
                Model::Moore => moore_raw(self.species, &self.inter, i, f, drive, &basis)?.total(),
                Model::Ozeri(photon) => ozeri_raw(self.species, &self.inter, i, f, drive, photon)?,
            };
        }
        Ok(total)
    }

    fn leakage(&self, i: Ket, drive: &LaserDrive, model: Model) -> Result<f64> {
        self.rate(i, drive, false, model)
    }

    fn non_rayleigh(&self, i: Ket, drive: &LaserDrive) -> Result<f64> {
        self.rate(i, drive, true, Model::Moore)
    }

    fn rabi(&self, a: Ket, b: Ket, pair: &DrivePair) -> Result<f64> {
        raman_raw(self.species, &self.inter, a, b, &pair.drive1, &pair.drive2)
    }

    fn tau(&self, a: Ket, b: Ket, pair: &DrivePair) -> Result<f64> {
        let om = self.rabi(a, b, pair)?;
        if om == 0.0 {
            return Err(Error::NoCoupling(format!(
                "{} and {}",
                a.to_state(self.species),
                b.to_state(self.species)
            )));
        }
        pi_time(om)
    }

    fn single(&self, q0: Ket, q1: Ket, pair: &DrivePair, variant: ErrorVariant, model: Model) -> Result<f64> {
        let tau = self.tau(q0, q1, pair)?;
        Ok(match variant {
            ErrorVariant::Fig4 => self.leakage(q0, &pair.drive1, model)? * tau,
            ErrorVariant::Full => {
                0.5 * (self.non_rayleigh(q0, &pair.drive1)? + self.non_rayleigh(q1, &pair.drive1)?) * tau
            }
        })
    }
}

/// Scatter probability during a π-pulse from `q0` to `q1` (full scattering
/// model).
pub fn single_qubit_error(
    species: &SpeciesData,
    q0: &HyperfineState,
    q1: &HyperfineState,
    pair: &DrivePair,
    variant: ErrorVariant,
    cfg: &ScatterConfig,
) -> Result<f64> {
    single_qubit_error_model(species, q0, q1, pair, variant, cfg, Model::Moore)
}

/// As [`single_qubit_error`] with a selectable scattering model for the
/// `Fig4` variant; `Full` always uses the full model.
pub fn single_qubit_error_model(
    species: &SpeciesData,
    q0: &HyperfineState,
    q1: &HyperfineState,
    pair: &DrivePair,
    variant: ErrorVariant,
    cfg: &ScatterConfig,
    model: Model,
) -> Result<f64> {
    let ev = Evaluator::new(species, cfg)?;
    ev.single(Ket::resolve(species, q0)?, Ket::resolve(species, q1)?, pair, variant, model)
}

/// (4/η)·ε for a full-variant single-qubit error ε.
pub fn two_qubit_error(single_qubit_full: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("Lamb-Dicke parameter must lie in (0, 1), got {eta}")));
    }
    if !(single_qubit_full >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "single-qubit error must be >= 0, got {single_qubit_full}"
        )));
    }
    Ok(4.0 / eta * single_qubit_full)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestQubit {
    /// Member with the larger leakage rate.
    pub q0: HyperfineState,
    pub q1: HyperfineState,
    /// Full-variant single-qubit error.
    pub error: f64,
    pub rabi: f64,
}

/// Relative tolerance under which two pair errors count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Exhaustive search over Raman-connectable pairs (|Δm| ≤ 2, nonzero Ω)
/// in `manifold` for the smallest full-variant error.
pub fn best_qubit_search(species: &SpeciesData, pair: &DrivePair, manifold: &str, cfg: &ScatterConfig) -> Result<BestQubit> {
    let ev = Evaluator::new(species, cfg)?;
    let states = kets_of(species, manifold)?;
    let rates: Vec<(f64, f64)> = states
        .par_iter()
        .map(|&s| {
            Ok((
                ev.non_rayleigh(s, &pair.drive1)?,
                ev.leakage(s, &pair.drive1, Model::Moore)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut candidates = Vec::new();
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            if (states[a].m - states[b].m).abs().twice() <= 4 {
                candidates.push((a, b));
            }
        }
    }
    let rabis: Vec<f64> = candidates
        .par_iter()
        .map(|&(a, b)| ev.rabi(states[a], states[b], pair))
        .collect::<Result<_>>()?;
    let max_rabi = rabis.iter().cloned().fold(0.0, f64::max);
    if !(max_rabi > 0.0) {
        return Err(Error::NoConnectablePair(manifold.to_string()));
    }

    let mut best: Option<(f64, (i32, i32, i32, i32), usize, usize, f64)> = None;
    for (&(a, b), &om) in candidates.iter().zip(&rabis) {
        if om <= 1e-12 * max_rabi {
            continue;
        }
        let err = 0.5 * (rates[a].0 + rates[b].0) * PI / om;
        // orient: q0 = larger leakage; exact ties keep (F, m) order
        let (x, y) = if rates[b].1 > rates[a].1 * (1.0 + TIE_TOLERANCE) { (b, a) } else { (a, b) };
        let key = (
            states[x].f.twice(),
            states[x].m.twice(),
            states[y].f.twice(),
            states[y].m.twice(),
        );
        let better = match &best {
            None => true,
            Some((e, k, ..)) => {
                if (err - e).abs() <= TIE_TOLERANCE * e.abs().max(err.abs()) {
                    key < *k
                } else {
                    err < *e
                }
            }
        };
        if better {
            best = Some((err, key, x, y, om));
        }
    }
    let (error, _, x, y, rabi) = best.ok_or_else(|| Error::NoConnectablePair(manifold.to_string()))?;
    Ok(BestQubit {
        q0: states[x].to_state(species),
        q1: states[y].to_state(species),
        error,
        rabi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    /// Laser minus resonance frequency, rad/s.
    pub detuning: f64,
    pub error_moore: f64,
    pub error_ozeri: f64,
}

/// Fig4-variant errors for both scattering models over a set of detunings
/// (rad/s, laser minus `reference` resonance). Rows come back sorted by
/// detuning.
pub fn detuning_sweep(
    species: &SpeciesData,
    q0: &HyperfineState,
    q1: &HyperfineState,
    pair: &DrivePair,
    reference: f64,
    detunings: &[f64],
    cfg: &ScatterConfig,
) -> Result<Vec<SweepRow>> {
    let ev = Evaluator::new(species, cfg)?;
    let a = Ket::resolve(species, q0)?;
    let b = Ket::resolve(species, q1)?;
    let mut grid: Vec<f64> = detunings.to_vec();
    if grid.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("non-finite detuning in sweep grid".into()));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.par_iter()
        .map(|&det| {
            let p = pair.with_omega(reference + det)?;
            let tau = ev.tau(a, b, &p)?;
            Ok(SweepRow {
                detuning: det,
                error_moore: ev.leakage(a, &p.drive1, Model::Moore)? * tau,
                error_ozeri: ev.leakage(a, &p.drive1, Model::Ozeri(OzeriPhoton::NearestToFinal))? * tau,
            })
        })
        .collect()
}

/// Resonance frequency (rad/s) from `level` to the lowest intermediate
/// level it couples to.
pub fn reference_resonance(species: &SpeciesData, level: &str, cfg: &ScatterConfig) -> Result<f64> {
    let base = species.level(level)?.energy;
    cfg.intermediates
        .iter()
        .filter_map(|k| {
            let lk = species.level(k).ok()?;
            let coupled = species.reduced_element(level, k).ok()? != 0.0;
            (coupled && lk.energy > base).then_some(lk.energy - base)
        })
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::InvalidArgument(format!("level {level} couples to no intermediate level above it")))
}

/// A laser setting used in the measurements: nominal wavelength label,
/// detuning from the qubit level's reference resonance, and the common
/// polarization angle of both beams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint {
    pub wavelength_nm: f64,
    /// THz, laser minus resonance.
    pub detuning_thz: f64,
    pub gamma: f64,
}

impl OperatingPoint {
    pub const NEAR_RED: OperatingPoint = OperatingPoint {
        wavelength_nm: 617.0,
        detuning_thz: -2.5,
        gamma: 0.105,
    };
    pub const FAR_RED: OperatingPoint = OperatingPoint {
        wavelength_nm: 674.0,
        detuning_thz: -43.0,
        gamma: 0.045,
    };
    pub const FAR_BLUE: OperatingPoint = OperatingPoint {
        wavelength_nm: 461.0,
        detuning_thz: 163.0,
        gamma: 0.105,
    };

    pub fn all() -> [OperatingPoint; 3] {
        [Self::NEAR_RED, Self::FAR_RED, Self::FAR_BLUE]
    }

    pub fn omega(&self, reference: f64) -> f64 {
        reference + self.detuning_thz * THZ_TO_RAD_S
    }

    pub fn drive_pair(&self, reference: f64, field: f64) -> Result<DrivePair> {
        DrivePair::perpendicular(self.omega(reference), field, self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateErrorRow {
    pub wavelength_nm: f64,
    /// Full-variant single-qubit error of the reference pair.
    pub single_qubit: f64,
    /// Two-qubit error of the reference pair.
    pub two_qubit: f64,
    /// Single-qubit π-time of the reference pair at the table's field.
    pub gate_time: f64,
    pub eta: f64,
    pub best: BestQubit,
    pub best_two_qubit: f64,
}

/// Settings for [`table2`].
#[derive(Clone, Debug, PartialEq)]
pub struct Table2Config {
    pub q0: HyperfineState,
    pub q1: HyperfineState,
    pub points: Vec<OperatingPoint>,
    pub trap_frequency: f64,
    pub beams: MsBeams,
    /// π-time of the reference pair at the first operating point; sets the
    /// common field amplitude.
    pub reference_pi_time: f64,
}

impl Table2Config {
    /// Ba-137 D5/2 qubit |1,0⟩/|3,0⟩, 2π×2 MHz mode, 5 µs π-time at 617 nm.
    pub fn ba137_default() -> Self {
        Table2Config {
            q0: HyperfineState::parse("5D5/2:1,0").expect("static state"),
            q1: HyperfineState::parse("5D5/2:3,0").expect("static state"),
            points: OperatingPoint::all().to_vec(),
            trap_frequency: 2.0 * PI * 2e6,
            beams: MsBeams::Perpendicular,
            reference_pi_time: 5e-6,
        }
    }
}

/// Two-qubit errors for the reference pair and for the best pair at each
/// operating point.
pub fn table2(species: &SpeciesData, table: &Table2Config, cfg: &ScatterConfig) -> Result<Vec<GateErrorRow>> {
    let first = *table
        .points
        .first()
        .ok_or_else(|| Error::InvalidArgument("no operating points".into()))?;
    let reference = reference_resonance(species, &table.q0.level, cfg)?;
    let a = Ket::resolve(species, &table.q0)?;
    let b = Ket::resolve(species, &table.q1)?;
    let ev = Evaluator::new(species, cfg)?;
    // Ω ∝ E², so one evaluation at unit field fixes the amplitude
    let unit_rabi = ev.rabi(a, b, &first.drive_pair(reference, 1.0)?)?;
    if unit_rabi == 0.0 {
        return Err(Error::NoCoupling(format!("{} and {}", table.q0, table.q1)));
    }
    let field = (PI / (table.reference_pi_time * unit_rabi)).sqrt();

    table
        .points
        .iter()
        .map(|p| {
            let pair = p.drive_pair(reference, field)?;
            let single = ev.single(a, b, &pair, ErrorVariant::Full, Model::Moore)?;
            let eta = lamb_dicke(species.mass_amu, table.trap_frequency, table.beams.delta_k(pair.drive1.omega))?;
            let best = best_qubit_search(species, &pair, &table.q0.level, cfg)?;
            Ok(GateErrorRow {
                wavelength_nm: p.wavelength_nm,
                single_qubit: single,
                two_qubit: two_qubit_error(single, eta)?,
                gate_time: ev.tau(a, b, &pair)?,
                eta,
                best_two_qubit: two_qubit_error(best.error, eta)?,
                best,
            })
        })
        .collect()
}
