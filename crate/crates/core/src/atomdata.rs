//! Atomic structure data: fine-structure levels, reduced dipole matrix
//! elements and hyperfine state bookkeeping.
//!
//! # Species file format
//!
//! Plain text, line oriented. `#` starts a comment. Sections are opened by
//! `[levels]`, `[dipoles]` or `[meta]`.
//!
//! ```text
//! [meta]
//! name      Ba-137        # optional, defaults to the file stem
//! I         3/2
//! mass_amu  136.9058
//!
//! [levels]
//! # label  L  J    energy     unit    [lifetime_s]
//! 6S1/2    0  1/2  0          invcm
//! 6P3/2    1  3/2  21952.404  invcm   6.3e-9
//!
//! [dipoles]
//! # lower  upper  value_ea0  [sign]
//! 6S1/2    6P3/2  4.7065     +1
//! ```
//!
//! Energy units are `invcm`, `THz` (ordinary frequency), `rad_s`, or `nm`
//! (vacuum wavelength of the transition from the ground level). Dipole
//! values are the reduced element ⟨J_upper‖r‖J_lower⟩ in units of e·a0; the
//! optional sign (`+1`/`-1`) multiplies the stored magnitude. The reverse
//! element follows
//! ⟨J_l‖r‖J_u⟩ = (−1)^(J_u−J_l) √((2J_u+1)/(2J_l+1)) ⟨J_u‖r‖J_l⟩.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::constants::{wavelength_to_omega, INVCM_TO_RAD_S, THZ_TO_RAD_S};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;

#[derive(Clone, Debug, PartialEq)]
pub struct FineLevel {
    pub label: String,
    pub l: u32,
    pub j: HalfInt,
    /// Angular frequency above the species ground level, rad/s.
    pub energy: f64,
    pub lifetime: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDipole {
    pub lower: String,
    pub upper: String,
    /// Signed ⟨J_upper‖r‖J_lower⟩ in e·a0.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesData {
    pub name: String,
    pub nuclear_spin: HalfInt,
    pub mass_amu: f64,
    levels: Vec<FineLevel>,
    dipoles: Vec<ReducedDipole>,
    level_index: HashMap<String, usize>,
    /// (lower index, upper index) -> signed upper-bra reduced element
    dipole_index: HashMap<(usize, usize), f64>,
}

/// A ket |level; F, m_F⟩.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperfineState {
    pub level: String,
    pub f: HalfInt,
    pub m: HalfInt,
}

impl HyperfineState {
    /// Builds a state and checks it against the species' J and I.
    pub fn new(species: &SpeciesData, level: &str, f: HalfInt, m: HalfInt) -> Result<Self> {
        let state = HyperfineState {
            level: level.to_string(),
            f,
            m,
        };
        species.validate_state(&state)?;
        Ok(state)
    }

    /// Parses the `LEVEL:F,m` syntax, e.g. `5D5/2:1,0` or `4D5/2:5/2,-3/2`.
    /// Only the syntax is checked; use [`SpeciesData::validate_state`] for the
    /// quantum numbers.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidState(format!("`{s}` is not of the form LEVEL:F,m"));
        let (level, qn) = s.trim().split_once(':').ok_or_else(bad)?;
        let (f, m) = qn.split_once(',').ok_or_else(bad)?;
        if level.is_empty() {
            return Err(bad());
        }
        Ok(HyperfineState {
            level: level.to_string(),
            f: f.parse().map_err(|_| bad())?,
            m: m.parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for HyperfineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{}", self.level, self.f, self.m)
    }
}

impl FromStr for HyperfineState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HyperfineState::parse(s)
    }
}

const BA137: &str = include_str!("../data/ba137.species");
const SR88: &str = include_str!("../data/sr88.species");

impl SpeciesData {
    /// Shipped data sets: `ba137`, `sr88`.
    pub fn builtin(name: &str) -> Result<Self> {
        let (text, default_name) = match name.to_ascii_lowercase().replace('-', "").as_str() {
            "ba137" | "ba137+" => (BA137, "ba137"),
            "sr88" | "sr88+" => (SR88, "sr88"),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "no built-in species `{name}` (available: ba137, sr88)"
                )))
            }
        };
        Self::parse(text, default_name)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["ba137", "sr88"]
    }

    /// Loads and validates a species file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("species");
        Self::parse(&text, stem)
    }

    /// Parses species-file text; `default_name` is used when `[meta]` has no
    /// `name` entry.
    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Levels,
            Dipoles,
            Meta,
        }
        let mut section = Section::None;
        let mut name = None;
        let mut spin = None;
        let mut mass = None;
        let mut levels = Vec::new();
        let mut raw_dipoles: Vec<(usize, String, String, f64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            if line.starts_with('[') {
                section = match line {
                    "[levels]" => Section::Levels,
                    "[dipoles]" => Section::Dipoles,
                    "[meta]" => Section::Meta,
                    other => return Err(perr(format!("unknown section header `{other}`"))),
                };
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match section {
                Section::None => return Err(perr("record outside of any section".into())),
                Section::Meta => {
                    if fields.len() != 2 {
                        return Err(perr(format!("expected `key value`, got `{line}`")));
                    }
                    match fields[0] {
                        "name" => name = Some(fields[1].to_string()),
                        "I" => {
                            spin = Some(fields[1].parse::<HalfInt>().map_err(|e| perr(e.to_string()))?)
                        }
                        "mass_amu" => {
                            mass = Some(
                                fields[1]
                                    .parse::<f64>()
                                    .map_err(|_| perr(format!("bad mass `{}`", fields[1])))?,
                            )
                        }
                        other => return Err(perr(format!("unknown meta key `{other}`"))),
                    }
                }
                Section::Levels => {
                    if fields.len() == 4 {
                        return Err(Error::Unit {
                            line: line_no,
                            record: line.to_string(),
                        });
                    }
                    if !(5..=6).contains(&fields.len()) {
                        return Err(perr(format!(
                            "expected `label L J energy unit [lifetime_s]`, got `{line}`"
                        )));
                    }
                    let l: u32 = fields[1]
                        .parse()
                        .map_err(|_| perr(format!("bad L `{}`", fields[1])))?;
                    let j: HalfInt = fields[2].parse().map_err(|e: Error| perr(e.to_string()))?;
                    let value: f64 = fields[3]
                        .parse()
                        .map_err(|_| perr(format!("bad energy `{}`", fields[3])))?;
                    let energy = match fields[4] {
                        "invcm" => value * INVCM_TO_RAD_S,
                        "THz" => value * THZ_TO_RAD_S,
                        "rad_s" => value,
                        // wavelength of the transition from the ground level
                        "nm" if value == 0.0 => 0.0,
                        "nm" => wavelength_to_omega(value * 1e-9),
                        _ => {
                            return Err(Error::Unit {
                                line: line_no,
                                record: line.to_string(),
                            })
                        }
                    };
                    let lifetime = match fields.get(5) {
                        Some(t) => Some(
                            t.parse::<f64>()
                                .map_err(|_| perr(format!("bad lifetime `{t}`")))?,
                        ),
                        None => None,
                    };
                    levels.push(FineLevel {
                        label: fields[0].to_string(),
                        l,
                        j,
                        energy,
                        lifetime,
                    });
                }
                Section::Dipoles => {
                    if !(3..=4).contains(&fields.len()) {
                        return Err(perr(format!(
                            "expected `lower upper value_ea0 [sign]`, got `{line}`"
                        )));
                    }
                    let value: f64 = fields[2]
                        .parse()
                        .map_err(|_| perr(format!("bad dipole value `{}`", fields[2])))?;
                    let sign = match fields.get(3).copied() {
                        None | Some("+1") | Some("1") | Some("+") => 1.0,
                        Some("-1") | Some("-") => -1.0,
                        Some(other) => return Err(perr(format!("bad sign `{other}`"))),
                    };
                    raw_dipoles.push((line_no, fields[0].into(), fields[1].into(), value.abs() * sign));
                    if value == 0.0 {
                        return Err(Error::Validation(format!(
                            "dipole {} -> {} has zero magnitude",
                            fields[0], fields[1]
                        )));
                    }
                }
            }
        }

        let nuclear_spin = spin.ok_or_else(|| Error::Validation("missing meta key `I`".into()))?;
        if nuclear_spin < HalfInt::ZERO {
            return Err(Error::Validation("nuclear spin must be >= 0".into()));
        }
        let mass_amu = mass.ok_or_else(|| Error::Validation("missing meta key `mass_amu`".into()))?;
        if !(mass_amu > 0.0) {
            return Err(Error::Validation("mass must be positive".into()));
        }

        let mut level_index = HashMap::new();
        for (i, level) in levels.iter().enumerate() {
            if level.j < HalfInt::ZERO {
                return Err(Error::Validation(format!("level {} has negative J", level.label)));
            }
            if !level.energy.is_finite() || level.energy < 0.0 {
                return Err(Error::Validation(format!(
                    "level {} has energy below the ground level",
                    level.label
                )));
            }
            if level_index.insert(level.label.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate level label {}", level.label)));
            }
        }
        match levels.iter().filter(|l| l.energy == 0.0).count() {
            1 => {}
            0 => return Err(Error::Validation("no ground level at energy 0".into())),
            _ => return Err(Error::Validation("more than one level at energy 0".into())),
        }

        let mut dipoles = Vec::new();
        let mut dipole_index = HashMap::new();
        for (line, lower, upper, value) in raw_dipoles {
            let lo = *level_index
                .get(&lower)
                .ok_or_else(|| Error::Validation(format!("line {line}: dipole references unknown level {lower}")))?;
            let up = *level_index
                .get(&upper)
                .ok_or_else(|| Error::Validation(format!("line {line}: dipole references unknown level {upper}")))?;
            let (ll, lu) = (&levels[lo], &levels[up]);
            let dj = (ll.j - lu.j).abs();
            if dj > HalfInt::ONE || ll.l.abs_diff(lu.l) != 1 || (ll.j == HalfInt::ZERO && lu.j == HalfInt::ZERO) {
                return Err(Error::Validation(format!(
                    "dipole pair ({lower}, {upper}) violates E1 selection rules"
                )));
            }
            if ll.energy >= lu.energy {
                return Err(Error::Validation(format!(
                    "dipole pair ({lower}, {upper}): lower level is not below upper level"
                )));
            }
            if dipole_index.insert((lo, up), value).is_some() {
                return Err(Error::Validation(format!("dipole pair ({lower}, {upper}) listed twice")));
            }
            dipoles.push(ReducedDipole { lower, upper, value });
        }

        Ok(SpeciesData {
            name: name.unwrap_or_else(|| default_name.to_string()),
            nuclear_spin,
            mass_amu,
            levels,
            dipoles,
            level_index,
            dipole_index,
        })
    }

    pub fn levels(&self) -> &[FineLevel] {
        &self.levels
    }

    pub fn dipoles(&self) -> &[ReducedDipole] {
        &self.dipoles
    }

    pub fn level(&self, label: &str) -> Result<&FineLevel> {
        self.level_index
            .get(label)
            .map(|&i| &self.levels[i])
            .ok_or_else(|| Error::UnknownLevel(label.to_string()))
    }

    pub(crate) fn level_idx(&self, label: &str) -> Result<usize> {
        self.level_index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLevel(label.to_string()))
    }

    pub(crate) fn level_at(&self, idx: usize) -> &FineLevel {
        &self.levels[idx]
    }

    /// Resolves a label exactly, or by unique suffix (`S1/2` -> `6S1/2`).
    pub fn resolve_label(&self, label: &str) -> Result<&FineLevel> {
        if let Ok(level) = self.level(label) {
            return Ok(level);
        }
        let mut hits = self.levels.iter().filter(|l| l.label.ends_with(label));
        match (hits.next(), hits.next()) {
            (Some(level), None) => Ok(level),
            _ => Err(Error::UnknownLevel(label.to_string())),
        }
    }

    pub fn ground(&self) -> &FineLevel {
        self.levels
            .iter()
            .find(|l| l.energy == 0.0)
            .expect("validated species has a ground level")
    }

    /// Reduced element ⟨bra‖r‖ket⟩ in e·a0, using the stored upper-bra value
    /// and the conjugation relation for the lower-bra direction. Zero when no
    /// dipole connects the levels.
    pub fn reduced_element(&self, bra: &str, ket: &str) -> Result<f64> {
        Ok(self.reduced_element_idx(self.level_idx(bra)?, self.level_idx(ket)?))
    }

    pub(crate) fn reduced_element_idx(&self, bra: usize, ket: usize) -> f64 {
        if let Some(&v) = self.dipole_index.get(&(ket, bra)) {
            // bra is the upper level
            return v;
        }
        if let Some(&v) = self.dipole_index.get(&(bra, ket)) {
            let ju = self.levels[ket].j;
            let jl = self.levels[bra].j;
            let phase = if ((ju - jl).twice() / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let ratio = f64::from(ju.multiplicity()) / f64::from(jl.multiplicity());
            return phase * ratio.sqrt() * v;
        }
        0.0
    }

    pub fn are_coupled(&self, a: &str, b: &str) -> Result<bool> {
        Ok(self.reduced_element(a, b)? != 0.0)
    }

    /// Levels whose parity differs from the ground level; the default set of
    /// intermediate levels for scattering sums.
    pub fn default_intermediates(&self) -> Vec<String> {
        let ground_parity = self.ground().l % 2;
        self.levels
            .iter()
            .filter(|l| l.l % 2 != ground_parity)
            .map(|l| l.label.clone())
            .collect()
    }

    pub fn validate_state(&self, state: &HyperfineState) -> Result<()> {
        let level = self.level(&state.level)?;
        let (j, i) = (level.j, self.nuclear_spin);
        let (f, m) = (state.f, state.m);
        let bad = |why: &str| Err(Error::InvalidState(format!("{state}: {why}")));
        if f < (j - i).abs() || f > j + i {
            return bad("F outside |J - I| ..= J + I");
        }
        if (f - (j + i)).twice() % 2 != 0 {
            return bad("F - (J + I) must be an integer");
        }
        if m.abs() > f {
            return bad("|m| > F");
        }
        if !(f - m).is_integer() {
            return bad("F - m must be an integer");
        }
        Ok(())
    }

    /// All |F, m⟩ of a level ordered by (F, m). Count = (2J+1)(2I+1).
    pub fn hyperfine_states(&self, label: &str) -> Result<Vec<HyperfineState>> {
        let level = self.level(label)?;
        let (j, i) = (level.j, self.nuclear_spin);
        let mut out = Vec::with_capacity((j.multiplicity() * i.multiplicity()) as usize);
        for f in (j - i).abs().range_inclusive(j + i) {
            for m in (-f).range_inclusive(f) {
                out.push(HyperfineState {
                    level: level.label.clone(),
                    f,
                    m,
                });
            }
        }
        Ok(out)
    }

    /// (E_b − E_a)/ħ in rad/s.
    pub fn transition_frequency(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.level(b)?.energy - self.level(a)?.energy)
    }
}

/// Free-function form of [`SpeciesData::load`].
pub fn load_species(path: impl AsRef<Path>) -> Result<SpeciesData> {
    SpeciesData::load(path)
}

/// Free-function form of [`SpeciesData::hyperfine_states`].
pub fn enumerate_hyperfine(species: &SpeciesData, level: &str) -> Result<Vec<HyperfineState>> {
    species.hyperfine_states(level)
}

/// Free-function form of [`SpeciesData::transition_frequency`].
pub fn transition_frequency(species: &SpeciesData, a: &str, b: &str) -> Result<f64> {
    species.transition_frequency(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::wavelength_to_omega;

    const MINIMAL: &str = "\
[meta]
I 0
mass_amu 10
[levels]
S 0 1/2 0 invcm
P 1 3/2 10 THz
D 2 5/2 5 THz
[dipoles]
S P 2.0
D P 1.5 -1
";

    #[test]
    fn builtin_ba137_has_five_levels() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        assert_eq!(ba.levels().len(), 5);
        for label in ["6S1/2", "6P1/2", "6P3/2", "5D3/2", "5D5/2"] {
            assert!(ba.level(label).is_ok(), "{label}");
        }
        assert_eq!(ba.nuclear_spin, HalfInt::from_twice(3));
        assert_eq!(ba.default_intermediates(), vec!["6P1/2", "6P3/2"]);
    }

    #[test]
    fn hyperfine_counts() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let d52 = ba.hyperfine_states("5D5/2").unwrap();
        assert_eq!(d52.len(), 24);
        let fs: Vec<_> = d52.iter().map(|s| s.f).collect();
        assert_eq!(fs.first(), Some(&HalfInt::from_int(1)));
        assert_eq!(fs.last(), Some(&HalfInt::from_int(4)));
        assert_eq!(ba.hyperfine_states("6S1/2").unwrap().len(), 8);
        for level in ba.levels() {
            let n = ba.hyperfine_states(&level.label).unwrap().len() as i32;
            assert_eq!(n, level.j.multiplicity() * ba.nuclear_spin.multiplicity());
        }

        let sr = SpeciesData::builtin("sr88").unwrap();
        let d = sr.hyperfine_states("4D5/2").unwrap();
        assert_eq!(d.len(), 6);
        assert!(d.iter().all(|s| s.f == HalfInt::from_twice(5)));
    }

    #[test]
    fn ordering_is_by_f_then_m() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let states = ba.hyperfine_states("5D3/2").unwrap();
        let mut sorted = states.clone();
        sorted.sort_by_key(|s| (s.f, s.m));
        assert_eq!(states, sorted);
    }

    #[test]
    fn transition_frequency_614nm() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let w = ba.transition_frequency("5D5/2", "6P3/2").unwrap();
        let expected = wavelength_to_omega(614e-9);
        assert!((w / expected - 1.0).abs() < 0.01);
        assert_eq!(ba.transition_frequency("6P3/2", "6P3/2").unwrap(), 0.0);
        assert_eq!(
            ba.transition_frequency("6P3/2", "5D5/2").unwrap(),
            -ba.transition_frequency("5D5/2", "6P3/2").unwrap()
        );
        assert!(matches!(
            ba.transition_frequency("5D5/2", "7P3/2"),
            Err(Error::UnknownLevel(_))
        ));
    }

    #[test]
    fn minimal_file_parses_with_sign() {
        let s = SpeciesData::parse(MINIMAL, "toy").unwrap();
        assert_eq!(s.name, "toy");
        assert_eq!(s.reduced_element("P", "D").unwrap(), -1.5);
        // lower-bra direction: (-1)^(3/2-5/2) sqrt(4/6) * (-1.5)
        let back = s.reduced_element("D", "P").unwrap();
        assert!((back - (4.0f64 / 6.0).sqrt() * 1.5).abs() < 1e-15);
        assert_eq!(s.reduced_element("S", "D").unwrap(), 0.0);
    }

    #[test]
    fn selection_rule_violation_is_rejected() {
        let text = MINIMAL.replace("D P 1.5 -1", "D P 1.5 -1\nS D 1.0");
        // S(L=0) -> D(L=2) breaks ΔL = ±1
        assert!(matches!(SpeciesData::parse(&text, "x"), Err(Error::Validation(_))));

        let ba_bad = "\
[meta]
I 3/2
mass_amu 137
[levels]
6S1/2 0 1/2 0 invcm
6P1/2 1 1/2 20261.561 invcm
5D5/2 2 5/2 5674.807 invcm
[dipoles]
5D5/2 6P1/2 1.0
";
        let err = SpeciesData::parse(ba_bad, "x").unwrap_err();
        assert!(err.to_string().contains("5D5/2"), "{err}");
    }

    #[test]
    fn missing_ground_level_is_rejected() {
        let text = MINIMAL.replace("S 0 1/2 0 invcm", "S 0 1/2 1 invcm");
        assert!(matches!(SpeciesData::parse(&text, "x"), Err(Error::Validation(_))));
    }

    #[test]
    fn missing_unit_reports_line() {
        let text = MINIMAL.replace("P 1 3/2 10 THz", "P 1 3/2 10");
        match SpeciesData::parse(&text, "x") {
            Err(Error::Unit { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("P 1 3/2 10 THz", "P 1 3/2 10 eV");
        assert!(matches!(SpeciesData::parse(&text, "x"), Err(Error::Unit { .. })));
    }

    #[test]
    fn parse_error_has_line_number() {
        let text = MINIMAL.replace("mass_amu 10", "mass_amu ten");
        match SpeciesData::parse(&text, "x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_pair_and_unknown_level() {
        let text = MINIMAL.replace("D P 1.5 -1", "D P 1.5 -1\nD P 1.0");
        assert!(SpeciesData::parse(&text, "x").is_err());
        let text = MINIMAL.replace("D P 1.5 -1", "D Q 1.5");
        assert!(SpeciesData::parse(&text, "x").is_err());
    }

    #[test]
    fn state_validation() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let ok = |s: &str| ba.validate_state(&HyperfineState::parse(s).unwrap());
        assert!(ok("5D5/2:1,0").is_ok());
        assert!(ok("5D5/2:4,-3").is_ok());
        assert!(ok("5D5/2:5,0").is_err());
        assert!(ok("5D5/2:1,2").is_err());
        assert!(ok("5D5/2:1,1/2").is_err());
        assert!(ok("6S1/2:3/2,1/2").is_err());
        assert!(matches!(ok("7S1/2:1,0"), Err(Error::UnknownLevel(_))));
        assert!(HyperfineState::parse("5D5/2-1,0").is_err());
        assert_eq!(HyperfineState::parse("5D5/2:4,-3").unwrap().to_string(), "5D5/2:4,-3");
    }

    #[test]
    fn loading_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.species");
        std::fs::write(&path, MINIMAL).unwrap();
        let a = load_species(&path).unwrap();
        let b = load_species(&path).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.name, "toy");
    }

    #[test]
    fn suffix_resolution() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        assert_eq!(ba.resolve_label("S1/2").unwrap().label, "6S1/2");
        assert_eq!(ba.resolve_label("D3/2").unwrap().label, "5D3/2");
        assert!(ba.resolve_label("1/2").is_err());
    }
}
