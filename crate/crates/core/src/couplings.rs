//! Hyperfine-resolved electric-dipole matrix elements and the quadrupole
//! geometric factors used for polarization calibration.

use num_complex::Complex64;

use crate::angular::{wigner3j, wigner6j, Polarization};
use crate::atomdata::{HyperfineState, SpeciesData};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;

/// A dipole matrix element ⟨bra|r_q|ket⟩ together with its labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DipoleME {
    pub bra: HyperfineState,
    pub ket: HyperfineState,
    pub q: i32,
    /// Units of e·a0.
    pub value: f64,
}

impl DipoleME {
    pub fn compute(species: &SpeciesData, bra: &HyperfineState, ket: &HyperfineState, q: i32) -> Result<Self> {
        Ok(DipoleME {
            bra: bra.clone(),
            ket: ket.clone(),
            q,
            value: dipole_me(species, bra, ket, q)?,
        })
    }
}

/// A hyperfine ket with its level resolved to an index into the species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Ket {
    pub level: usize,
    pub f: HalfInt,
    pub m: HalfInt,
}

impl Ket {
    pub fn resolve(species: &SpeciesData, state: &HyperfineState) -> Result<Ket> {
        species.validate_state(state)?;
        Ok(Ket {
            level: species.level_idx(&state.level)?,
            f: state.f,
            m: state.m,
        })
    }

    pub fn to_state(self, species: &SpeciesData) -> HyperfineState {
        HyperfineState {
            level: species.level_at(self.level).label.clone(),
            f: self.f,
            m: self.m,
        }
    }
}

pub(crate) fn kets_of(species: &SpeciesData, label: &str) -> Result<Vec<Ket>> {
    species
        .hyperfine_states(label)?
        .iter()
        .map(|s| Ket::resolve(species, s))
        .collect()
}

fn parity(twice: i32) -> f64 {
    debug_assert!(twice % 2 == 0);
    if (twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn me_raw(species: &SpeciesData, bra: Ket, ket: Ket, q: i32) -> f64 {
    if bra.m.twice() != ket.m.twice() + 2 * q {
        return 0.0;
    }
    let reduced = species.reduced_element_idx(bra.level, ket.level);
    if reduced == 0.0 {
        return 0.0;
    }
    let jb = species.level_at(bra.level).j;
    let jk = species.level_at(ket.level).j;
    let i = species.nuclear_spin;
    let one = HalfInt::ONE;
    let six = wigner6j(jb, jk, one, ket.f, bra.f, i);
    if six == 0.0 {
        return 0.0;
    }
    let three = wigner3j(bra.f, one, ket.f, -bra.m, HalfInt::from_int(q), ket.m);
    if three == 0.0 {
        return 0.0;
    }
    let phase = parity((ket.f + jb + one + i).twice()) * parity((bra.f - bra.m).twice());
    let norm = f64::from(ket.f.multiplicity() * bra.f.multiplicity()).sqrt();
    reduced * phase * norm * six * three
}

/// ⟨bra|r·ε|ket⟩ = Σ_q (−1)^q ⟨bra|r_q|ket⟩ ε₋q.
pub(crate) fn dot_raw(species: &SpeciesData, bra: Ket, ket: Ket, eps: &[Complex64; 3]) -> Complex64 {
    let dm = (bra.m - ket.m).twice();
    if dm % 2 != 0 || dm.abs() > 2 {
        return Complex64::new(0.0, 0.0);
    }
    let q = dm / 2;
    let value = me_raw(species, bra, ket, q);
    if value == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    eps[(1 - q) as usize] * (sign * value)
}

/// Spherical-tensor dipole element ⟨F_b m_b|r_q|F_k m_k⟩ in e·a0.
///
/// Returns 0 when no reduced element connects the two levels or when any
/// selection rule fails.
pub fn dipole_me(species: &SpeciesData, bra: &HyperfineState, ket: &HyperfineState, q: i32) -> Result<f64> {
    if !(-1..=1).contains(&q) {
        return Err(Error::InvalidArgument(format!("spherical index q = {q} outside -1..=1")));
    }
    let b = Ket::resolve(species, bra)?;
    let k = Ket::resolve(species, ket)?;
    Ok(me_raw(species, b, k, q))
}

/// ⟨bra|r·ε|ket⟩ in e·a0 for a (possibly complex) polarization.
pub fn dipole_dot(species: &SpeciesData, bra: &HyperfineState, ket: &HyperfineState, eps: &Polarization) -> Result<Complex64> {
    let b = Ket::resolve(species, bra)?;
    let k = Ket::resolve(species, ket)?;
    Ok(dot_raw(species, b, k, &eps.spherical_components()))
}

/// Relative quadrupole coupling strengths (g0, g1, g2) for Δm = 0, ±1, ±2 of
/// a beam at angle `phi` to the quantization axis with polarization angle
/// `gamma`.
pub fn quadrupole_geometric_factors(phi: f64, gamma: f64) -> [f64; 3] {
    let (sg, cg) = gamma.sin_cos();
    let g0 = 0.5 * (cg * (2.0 * phi).sin()).abs();
    let g1 = Complex64::new(cg * (2.0 * phi).cos(), -sg * phi.cos()).norm() / 6f64.sqrt();
    let g2 = Complex64::new(0.5 * cg * (2.0 * phi).sin(), -sg * phi.sin()).norm() / 6f64.sqrt();
    [g0, g1, g2]
}
