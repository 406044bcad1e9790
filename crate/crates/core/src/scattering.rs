//! Spontaneous Raman scattering rates.
//!
//! The full model sums, for each spontaneous-photon polarization, the
//! coherent second-order amplitude over all hyperfine states of the
//! intermediate levels. Four time orderings contribute: Λ (absorb then emit)
//! and V (emit then absorb) share the scattered-photon frequency
//! ω + (E_i − E_f)/ħ; the two ladder orderings emit at (E_i − E_f)/ħ − ω.
//! Each group is dropped when its photon frequency is not positive.
//!
//! The simplified model keeps only the Λ ordering, couples only through the
//! intermediate level nearest to resonance, and uses a fixed photon
//! frequency in the density-of-states prefactor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angular::{BeamGeometry, Polarization};
use crate::atomdata::{HyperfineState, SpeciesData};
use crate::constants::{wavelength_to_omega, EA0, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::couplings::{dot_raw, kets_of, Ket};
use crate::error::{Error, Result};

/// A monochromatic laser field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserDrive {
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Field amplitude, V/m.
    pub field: f64,
    pub polarization: Polarization,
}

impl LaserDrive {
    pub fn new(omega: f64, field: f64, polarization: Polarization) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("laser frequency must be positive, got {omega}")));
        }
        if !(field >= 0.0) || !field.is_finite() {
            return Err(Error::InvalidArgument(format!("field amplitude must be >= 0, got {field}")));
        }
        Ok(LaserDrive {
            omega,
            field,
            polarization,
        })
    }

    pub fn from_geometry(omega: f64, field: f64, geometry: BeamGeometry) -> Result<Self> {
        Self::new(omega, field, geometry.polarization())
    }

    pub fn from_wavelength(wavelength_m: f64, field: f64, polarization: Polarization) -> Result<Self> {
        if !(wavelength_m > 0.0) {
            return Err(Error::InvalidArgument(format!("wavelength must be positive, got {wavelength_m}")));
        }
        Self::new(wavelength_to_omega(wavelength_m), field, polarization)
    }

    pub fn with_field(self, field: f64) -> Result<Self> {
        Self::new(self.omega, field, self.polarization)
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(omega, self.field, self.polarization)
    }
}

/// Rates (1/s) from the Λ+V group and from the ladder group.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChannelRates {
    pub lambda_v: f64,
    pub ladder: f64,
}

impl ChannelRates {
    pub fn total(&self) -> f64 {
        self.lambda_v + self.ladder
    }
}

impl std::ops::Add for ChannelRates {
    type Output = ChannelRates;
    fn add(self, rhs: ChannelRates) -> ChannelRates {
        ChannelRates {
            lambda_v: self.lambda_v + rhs.lambda_v,
            ladder: self.ladder + rhs.ladder,
        }
    }
}

/// Photon frequency used in the simplified model's prefactor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OzeriPhoton {
    /// Resonance frequency between the nearest intermediate level and the
    /// final level (tracks the actual emission line of each channel).
    #[default]
    NearestToFinal,
    /// Resonance frequency between the nearest intermediate level and the
    /// initial level, shared by every final state.
    NearestToInitial,
}

/// Scattering model selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Moore,
    Ozeri(OzeriPhoton),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Moore => "moore",
            Model::Ozeri(_) => "ozeri",
        }
    }
}

/// Intermediate levels and the resonance guard.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterConfig {
    pub intermediates: Vec<String>,
    /// Smallest allowed |detuning| in rad/s.
    pub resonance_floor: f64,
}

impl ScatterConfig {
    pub const DEFAULT_FLOOR: f64 = 2.0 * PI * 1e9;

    /// Default intermediates: every level of opposite parity to the ground
    /// level.
    pub fn for_species(species: &SpeciesData) -> Self {
        ScatterConfig {
            intermediates: species.default_intermediates(),
            resonance_floor: Self::DEFAULT_FLOOR,
        }
    }

    pub fn with_intermediates<S: AsRef<str>>(mut self, labels: &[S]) -> Self {
        self.intermediates = labels.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.resonance_floor = floor;
        self
    }
}

/// Intermediate states resolved against a species, grouped by level.
pub(crate) struct Intermediates {
    pub levels: Vec<(usize, f64, Vec<Ket>)>,
    pub floor: f64,
}

impl Intermediates {
    pub fn new(species: &SpeciesData, cfg: &ScatterConfig) -> Result<Self> {
        let mut levels = Vec::new();
        for label in &cfg.intermediates {
            let idx = species.level_idx(label)?;
            levels.push((idx, species.level_at(idx).energy, kets_of(species, label)?));
        }
        if !(cfg.resonance_floor >= 0.0) {
            return Err(Error::InvalidArgument("resonance floor must be >= 0".into()));
        }
        Ok(Intermediates {
            levels,
            floor: cfg.resonance_floor,
        })
    }

    pub fn check(&self, context: &str, detuning: f64) -> Result<()> {
        if detuning.abs() < self.floor || detuning == 0.0 {
            return Err(Error::Resonance {
                context: context.to_string(),
                detuning,
                floor: self.floor,
            });
        }
        Ok(())
    }
}

fn prefactor(field: f64, omega_sc: f64) -> f64 {
    let ea0_4 = EA0.powi(4);
    field * field * omega_sc.powi(3) / (12.0 * PI * EPSILON_0 * HBAR.powi(3) * SPEED_OF_LIGHT.powi(3)) * ea0_4
}

fn spherical_basis() -> [[Complex64; 3]; 3] {
    [-1, 0, 1].map(|q| Polarization::spherical_basis(q).spherical_components())
}

fn connects(species: &SpeciesData, a: usize, b: usize) -> bool {
    species.reduced_element_idx(a, b) != 0.0
}

pub(crate) fn moore_raw(
    species: &SpeciesData,
    inter: &Intermediates,
    i: Ket,
    f: Ket,
    drive: &LaserDrive,
    basis: &[[Complex64; 3]; 3],
) -> Result<ChannelRates> {
    let ei = species.level_at(i.level).energy;
    let ef = species.level_at(f.level).energy;
    let w = drive.omega;
    let eps = drive.polarization.spherical_components();
    let eps_c = drive.polarization.conj().spherical_components();
    let w_sc = w + (ei - ef);
    let w_sc_l = (ei - ef) - w;

    let open_lv = w_sc > 0.0;
    let open_l = w_sc_l > 0.0;
    let mut amp = [Complex64::new(0.0, 0.0); 3];
    let mut amp_l = [Complex64::new(0.0, 0.0); 3];
    for (lvl, ek, kets) in &inter.levels {
        if !connects(species, *lvl, i.level) || !connects(species, *lvl, f.level) {
            continue;
        }
        let d_lambda = ek - ei - w;
        let d_v = ek - ef + w;
        let d_l1 = ek - ei + w;
        let d_l2 = ek - ef - w;
        if open_lv {
            inter.check("Λ", d_lambda)?;
            inter.check("V", d_v)?;
        }
        if open_l {
            inter.check("ladder L1", d_l1)?;
            inter.check("ladder L2", d_l2)?;
        }
        for &k in kets {
            let k_eps_i = dot_raw(species, k, i, &eps);
            let f_eps_k = dot_raw(species, f, k, &eps);
            let (k_epsc_i, f_epsc_k) = if open_l {
                (dot_raw(species, k, i, &eps_c), dot_raw(species, f, k, &eps_c))
            } else {
                Default::default()
            };
            for (n, e) in basis.iter().enumerate() {
                let f_e_k = dot_raw(species, f, k, e);
                let k_e_i = dot_raw(species, k, i, e);
                if open_lv {
                    amp[n] += f_e_k * k_eps_i / d_lambda + f_eps_k * k_e_i / d_v;
                }
                if open_l {
                    amp_l[n] += f_e_k * k_epsc_i / d_l1 + f_epsc_k * k_e_i / d_l2;
                }
            }
        }
    }
    let lambda_v = if open_lv {
        prefactor(drive.field, w_sc) * amp.iter().map(|a| a.norm_sqr()).sum::<f64>()
    } else {
        0.0
    };
    let ladder = if open_l {
        prefactor(drive.field, w_sc_l) * amp_l.iter().map(|a| a.norm_sqr()).sum::<f64>()
    } else {
        0.0
    };
    Ok(ChannelRates { lambda_v, ladder })
}

/// The intermediate level nearest to resonance with the drive from `i`,
/// among those that couple to it.
fn nearest_intermediate<'a>(
    species: &SpeciesData,
    inter: &'a Intermediates,
    i: Ket,
    omega: f64,
) -> Option<&'a (usize, f64, Vec<Ket>)> {
    let ei = species.level_at(i.level).energy;
    inter
        .levels
        .iter()
        .filter(|(lvl, _, _)| connects(species, *lvl, i.level))
        .min_by(|a, b| {
            let da = (a.1 - ei - omega).abs();
            let db = (b.1 - ei - omega).abs();
            da.total_cmp(&db)
        })
}

pub(crate) fn ozeri_raw(
    species: &SpeciesData,
    inter: &Intermediates,
    i: Ket,
    f: Ket,
    drive: &LaserDrive,
    photon: OzeriPhoton,
) -> Result<f64> {
    let Some((lvl, ek, kets)) = nearest_intermediate(species, inter, i, drive.omega) else {
        return Ok(0.0);
    };
    if !connects(species, *lvl, f.level) {
        return Ok(0.0);
    }
    let ei = species.level_at(i.level).energy;
    let ef = species.level_at(f.level).energy;
    let d_lambda = ek - ei - drive.omega;
    inter.check("Λ", d_lambda)?;
    let w_ref = match photon {
        OzeriPhoton::NearestToFinal => ek - ef,
        OzeriPhoton::NearestToInitial => ek - ei,
    };
    let eps = drive.polarization.spherical_components();
    let basis = spherical_basis();
    let mut amp = [Complex64::new(0.0, 0.0); 3];
    for &k in kets {
        let k_eps_i = dot_raw(species, k, i, &eps);
        if k_eps_i == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (n, e) in basis.iter().enumerate() {
            amp[n] += dot_raw(species, f, k, e) * k_eps_i / d_lambda;
        }
    }
    Ok(prefactor(drive.field, w_ref) * amp.iter().map(|a| a.norm_sqr()).sum::<f64>())
}

/// Full four-channel rate from `i` to `f`, summing the spontaneous photon
/// over the spherical basis.
pub fn srs_rate(
    species: &SpeciesData,
    i: &HyperfineState,
    f: &HyperfineState,
    drive: &LaserDrive,
    cfg: &ScatterConfig,
) -> Result<ChannelRates> {
    let inter = Intermediates::new(species, cfg)?;
    moore_raw(species, &inter, Ket::resolve(species, i)?, Ket::resolve(species, f)?, drive, &spherical_basis())
}

/// As [`srs_rate`] with the spontaneous photon summed over an arbitrary
/// orthonormal polarization triad.
pub fn srs_rate_with_basis(
    species: &SpeciesData,
    i: &HyperfineState,
    f: &HyperfineState,
    drive: &LaserDrive,
    cfg: &ScatterConfig,
    basis: &[Polarization; 3],
) -> Result<ChannelRates> {
    for a in 0..3 {
        for b in 0..3 {
            let ca = basis[a].cartesian();
            let cb = basis[b].cartesian();
            let overlap: Complex64 = (0..3).map(|n| ca[n].conj() * cb[n]).sum();
            let expected = if a == b { 1.0 } else { 0.0 };
            if (overlap - Complex64::new(expected, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidArgument("polarization basis is not orthonormal".into()));
            }
        }
    }
    let inter = Intermediates::new(species, cfg)?;
    let comps = [
        basis[0].spherical_components(),
        basis[1].spherical_components(),
        basis[2].spherical_components(),
    ];
    moore_raw(species, &inter, Ket::resolve(species, i)?, Ket::resolve(species, f)?, drive, &comps)
}

/// Simplified Λ-only rate with the photon frequency tied to the nearest
/// intermediate-to-final resonance.
pub fn srs_rate_ozeri(
    species: &SpeciesData,
    i: &HyperfineState,
    f: &HyperfineState,
    drive: &LaserDrive,
    cfg: &ScatterConfig,
) -> Result<f64> {
    srs_rate_ozeri_with(species, i, f, drive, cfg, OzeriPhoton::NearestToFinal)
}

pub fn srs_rate_ozeri_with(
    species: &SpeciesData,
    i: &HyperfineState,
    f: &HyperfineState,
    drive: &LaserDrive,
    cfg: &ScatterConfig,
    photon: OzeriPhoton,
) -> Result<f64> {
    let inter = Intermediates::new(species, cfg)?;
    ozeri_raw(species, &inter, Ket::resolve(species, i)?, Ket::resolve(species, f)?, drive, photon)
}

/// Which final states a report covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinalSelector {
    /// Every state of the listed levels; the bool excludes the initial
    /// state (no Rayleigh row) when true.
    Levels(Vec<(String, bool)>),
    /// Every level of the initial level's parity, Rayleigh included.
    All,
    /// Every level of the initial level's parity other than the initial
    /// level itself.
    Leakage,
}

impl FinalSelector {
    /// Parses `S1/2+D3/2`, `D5/2-non-Rayleigh`, `all` or `leakage`. Level
    /// names may be given by unique suffix.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text.to_ascii_lowercase().as_str() {
            "all" => return Ok(FinalSelector::All),
            "leakage" => return Ok(FinalSelector::Leakage),
            "" => return Err(Error::InvalidArgument("empty final-state selector".into())),
            _ => {}
        }
        let mut out = Vec::new();
        for token in text.split('+') {
            let token = token.trim();
            let (label, exclude) = match token.strip_suffix("-non-Rayleigh") {
                Some(l) => (l, true),
                None => (token, false),
            };
            if label.is_empty() {
                return Err(Error::InvalidArgument(format!("bad selector token `{token}`")));
            }
            out.push((label.to_string(), exclude));
        }
        Ok(FinalSelector::Levels(out))
    }

    /// Resolves to (level label, exclude-initial) pairs in report order.
    pub fn resolve(&self, species: &SpeciesData, initial: &HyperfineState) -> Result<Vec<(String, bool)>> {
        let init_level = species.level(&initial.level)?;
        let same_parity = || {
            species
                .levels()
                .iter()
                .filter(|l| l.l % 2 == init_level.l % 2)
                .map(|l| l.label.clone())
        };
        Ok(match self {
            FinalSelector::All => same_parity().map(|l| (l, false)).collect(),
            FinalSelector::Leakage => same_parity()
                .filter(|l| *l != init_level.label)
                .map(|l| (l, false))
                .collect(),
            FinalSelector::Levels(list) => {
                let mut out = Vec::new();
                for (label, exclude) in list {
                    out.push((species.resolve_label(label)?.label.clone(), *exclude));
                }
                out
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub final_state: HyperfineState,
    pub rates: ChannelRates,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringReport {
    pub initial: HyperfineState,
    pub model: Model,
    pub rows: Vec<ReportRow>,
    /// Per destination level, in selector order.
    pub level_totals: Vec<(String, ChannelRates)>,
    pub total: ChannelRates,
}

impl ScatteringReport {
    pub fn total_rate(&self) -> f64 {
        self.total.total()
    }
}

/// Rates from `initial` into every selected final state. Rows are ordered
/// by selector level, then (F, m).
pub fn scattering_report(
    species: &SpeciesData,
    initial: &HyperfineState,
    drive: &LaserDrive,
    finals: &FinalSelector,
    cfg: &ScatterConfig,
    model: Model,
) -> Result<ScatteringReport> {
    let inter = Intermediates::new(species, cfg)?;
    let i = Ket::resolve(species, initial)?;
    let levels = finals.resolve(species, initial)?;
    let mut targets = Vec::new();
    for (label, exclude) in &levels {
        for k in kets_of(species, label)? {
            if *exclude && k == i {
                continue;
            }
            targets.push(k);
        }
    }
    let basis = spherical_basis();
    let rates: Vec<ChannelRates> = targets
        .par_iter()
        .map(|&f| match model {
            Model::Moore => moore_raw(species, &inter, i, f, drive, &basis),
            Model::Ozeri(photon) => ozeri_raw(species, &inter, i, f, drive, photon).map(|r| ChannelRates {
                lambda_v: r,
                ladder: 0.0,
            }),
        })
        .collect::<Result<_>>()?;

    let rows: Vec<ReportRow> = targets
        .iter()
        .zip(rates)
        .map(|(k, rates)| ReportRow {
            final_state: k.to_state(species),
            rates,
        })
        .collect();
    let mut level_totals = Vec::new();
    for (label, _) in &levels {
        let sum = rows
            .iter()
            .filter(|r| &r.final_state.level == label)
            .fold(ChannelRates::default(), |acc, r| acc + r.rates);
        level_totals.push((label.clone(), sum));
    }
    let total = rows.iter().fold(ChannelRates::default(), |acc, r| acc + r.rates);
    Ok(ScatteringReport {
        initial: initial.clone(),
        model,
        rows,
        level_totals,
        total,
    })
}

/// Total rate from `initial` into the selected finals (sum of a report).
pub fn total_rate(
    species: &SpeciesData,
    initial: &HyperfineState,
    drive: &LaserDrive,
    finals: &FinalSelector,
    cfg: &ScatterConfig,
    model: Model,
) -> Result<f64> {
    Ok(scattering_report(species, initial, drive, finals, cfg, model)?.total_rate())
}
