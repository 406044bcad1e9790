//! Python module `srslab_py`.
//!
//! States are passed as strings such as `"5D5/2:1,0"`; frequencies are
//! angular (rad/s) and fields are in V/m.

use std::f64::consts::FRAC_PI_2;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use srslab::angular::{wigner3j_f64, wigner6j_f64, BeamGeometry, SecondBeamGeometry};
use srslab::expsim::{simulate_survival as sim_survival, SequenceConfig};
use srslab::fitting::{extract_srs_rate, fit_exponential as fit_exp, FitResult, SurvivalCurve, SurvivalRecord};
use srslab::gates::{self, DrivePair, ErrorVariant};
use srslab::lightshift;
use srslab::raman;
use srslab::scattering::{self, FinalSelector, LaserDrive, Model, OzeriPhoton, ScatterConfig};
use srslab::{Error, HyperfineState, SpeciesData};

fn py_err(e: Error) -> PyErr {
    if e.is_physics() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for srslab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn state(s: &str) -> PyResult<HyperfineState> {
    HyperfineState::parse(s).py()
}

fn model(name: &str) -> PyResult<Model> {
    match name {
        "moore" => Ok(Model::Moore),
        "ozeri" => Ok(Model::Ozeri(OzeriPhoton::NearestToFinal)),
        other => Err(PyValueError::new_err(format!("unknown model `{other}`; use moore or ozeri"))),
    }
}

/// Level data for one species.
#[pyclass(name = "Species", module = "srslab_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpecies {
    inner: SpeciesData,
    cfg: ScatterConfig,
}

impl PySpecies {
    fn wrap(inner: SpeciesData) -> Self {
        let cfg = ScatterConfig::for_species(&inner);
        PySpecies { inner, cfg }
    }
}

#[pymethods]
impl PySpecies {
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        SpeciesData::builtin(name).py().map(Self::wrap)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        SpeciesData::load(path).py().map(Self::wrap)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        SpeciesData::parse(text, "custom").py().map(Self::wrap)
    }

    /// Copy restricted to the given intermediate levels and resonance floor
    /// (rad/s).
    #[pyo3(signature = (intermediates=None, floor=None))]
    fn configured(&self, intermediates: Option<Vec<String>>, floor: Option<f64>) -> PyResult<Self> {
        let mut cfg = self.cfg.clone();
        if let Some(list) = intermediates {
            for l in &list {
                self.inner.level(l).py()?;
            }
            cfg = cfg.with_intermediates(&list);
        }
        if let Some(f) = floor {
            cfg = cfg.with_floor(f);
        }
        Ok(PySpecies {
            inner: self.inner.clone(),
            cfg,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn nuclear_spin(&self) -> f64 {
        self.inner.nuclear_spin.value()
    }

    #[getter]
    fn mass_amu(&self) -> f64 {
        self.inner.mass_amu
    }

    /// `(label, l, j, energy_rad_s, lifetime_s)` per fine-structure level.
    fn levels(&self) -> Vec<(String, u32, f64, f64, Option<f64>)> {
        self.inner
            .levels()
            .iter()
            .map(|l| (l.label.clone(), l.l, l.j.value(), l.energy, l.lifetime))
            .collect()
    }

    fn hyperfine_states(&self, level: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.hyperfine_states(level).py()?.iter().map(|s| s.to_string()).collect())
    }

    /// Lowest resonance (rad/s) from `level` to an intermediate level.
    fn reference_resonance(&self, level: &str) -> PyResult<f64> {
        gates::reference_resonance(&self.inner, level, &self.cfg).py()
    }

    fn __repr__(&self) -> String {
        format!("Species({:?}, {} levels)", self.inner.name, self.inner.levels().len())
    }
}

/// A monochromatic drive. `second_beam` selects the geometry with k̂ in the
/// y–z plane.
#[pyclass(name = "Drive", module = "srslab_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDrive {
    inner: LaserDrive,
}

#[pymethods]
impl PyDrive {
    #[new]
    #[pyo3(signature = (omega, field, phi=FRAC_PI_2, gamma=0.0, second_beam=false))]
    fn new(omega: f64, field: f64, phi: f64, gamma: f64, second_beam: bool) -> PyResult<Self> {
        let pol = if second_beam {
            SecondBeamGeometry::new(phi, gamma).polarization()
        } else {
            BeamGeometry::new(phi, gamma).polarization()
        };
        Ok(PyDrive {
            inner: LaserDrive::new(omega, field, pol).py()?,
        })
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn field(&self) -> f64 {
        self.inner.field
    }

    fn with_field(&self, field: f64) -> PyResult<Self> {
        Ok(PyDrive {
            inner: self.inner.with_field(field).py()?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Drive(omega={:e}, field={:e})", self.inner.omega, self.inner.field)
    }
}

/// `(lambda_v, ladder)` rates in 1/s from `initial` to `final`.
#[pyfunction]
fn srs_rate(species: &PySpecies, initial: &str, r#final: &str, drive: &PyDrive) -> PyResult<(f64, f64)> {
    let r = scattering::srs_rate(&species.inner, &state(initial)?, &state(r#final)?, &drive.inner, &species.cfg).py()?;
    Ok((r.lambda_v, r.ladder))
}

/// Summed rate into `finals` (`leakage`, `all`, or `+`-joined levels).
#[pyfunction]
#[pyo3(signature = (species, initial, drive, finals="leakage", model="moore"))]
fn total_rate(species: &PySpecies, initial: &str, drive: &PyDrive, finals: &str, model: &str) -> PyResult<f64> {
    let sel = FinalSelector::parse(finals).py()?;
    scattering::total_rate(&species.inner, &state(initial)?, &drive.inner, &sel, &species.cfg, self::model(model)?).py()
}

/// Light shift of one state, rad/s.
#[pyfunction]
fn stark_shift(species: &PySpecies, s: &str, drive: &PyDrive) -> PyResult<f64> {
    lightshift::stark_shift(&species.inner, &state(s)?, &drive.inner, &species.cfg).py()
}

/// δ_d − δ_s in rad/s.
#[pyfunction]
fn differential_stark(species: &PySpecies, d: &str, s: &str, drive: &PyDrive) -> PyResult<f64> {
    lightshift::differential_stark(&species.inner, &state(d)?, &state(s)?, &drive.inner, &species.cfg).py()
}

/// Field (V/m) reproducing a measured differential shift (rad/s).
#[pyfunction]
fn field_from_stark(species: &PySpecies, d: &str, s: &str, drive: &PyDrive, measured: f64) -> PyResult<f64> {
    lightshift::field_from_stark(&species.inner, &state(d)?, &state(s)?, &drive.inner, measured, &species.cfg).py()
}

/// Two-photon Rabi frequency (rad/s) between `a` and `b`.
#[pyfunction]
fn raman_rabi(species: &PySpecies, a: &str, b: &str, drive1: &PyDrive, drive2: &PyDrive) -> PyResult<f64> {
    raman::raman_rabi(&species.inner, &state(a)?, &state(b)?, &drive1.inner, &drive2.inner, &species.cfg).py()
}

/// π-pulse scattering error with perpendicular beams at a common angle.
#[pyfunction]
#[pyo3(signature = (species, q0, q1, omega, gamma, variant="fig4", model="moore"))]
fn single_qubit_error(
    species: &PySpecies,
    q0: &str,
    q1: &str,
    omega: f64,
    gamma: f64,
    variant: &str,
    model: &str,
) -> PyResult<f64> {
    let variant = match variant {
        "fig4" => ErrorVariant::Fig4,
        "full" => ErrorVariant::Full,
        other => return Err(PyValueError::new_err(format!("unknown variant `{other}`; use fig4 or full"))),
    };
    let pair = DrivePair::perpendicular(omega, 1.0, gamma).py()?;
    gates::single_qubit_error_model(&species.inner, &state(q0)?, &state(q1)?, &pair, variant, &species.cfg, self::model(model)?)
        .py()
}

/// `(q0, q1, error)` for the pair with the smallest full-variant error.
#[pyfunction]
#[pyo3(signature = (species, omega, gamma, manifold="5D5/2"))]
fn best_qubit(species: &PySpecies, omega: f64, gamma: f64, manifold: &str) -> PyResult<(String, String, f64)> {
    let pair = DrivePair::perpendicular(omega, 1.0, gamma).py()?;
    let b = gates::best_qubit_search(&species.inner, &pair, manifold, &species.cfg).py()?;
    Ok((b.q0.to_string(), b.q1.to_string(), b.error))
}

/// `(wavelength_nm, two_qubit, best_two_qubit)` rows with default settings.
#[pyfunction]
fn table2(species: &PySpecies) -> PyResult<Vec<(f64, f64, f64)>> {
    let rows = gates::table2(&species.inner, &gates::Table2Config::ba137_default(), &species.cfg).py()?;
    Ok(rows.iter().map(|r| (r.wavelength_nm, r.two_qubit, r.best_two_qubit)).collect())
}

#[pyfunction]
fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> PyResult<f64> {
    wigner3j_f64([j1, j2, j3], [m1, m2, m3]).py()
}

#[pyfunction]
fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> PyResult<f64> {
    wigner6j_f64([j1, j2, j3], [j4, j5, j6]).py()
}

/// `(delay_s, trials, survivors)` rows of a simulated decay.
#[pyfunction]
#[pyo3(signature = (rate, bin=0.1, bins=50, trials=10_000, seed=0))]
fn simulate_survival(rate: f64, bin: f64, bins: usize, trials: u64, seed: u64) -> PyResult<Vec<(f64, u64, u64)>> {
    let cfg = SequenceConfig::new(rate)
        .with_bin(bin)
        .with_max_bins(bins)
        .with_trials(trials)
        .with_seed(seed);
    let curve = sim_survival(&cfg).py()?;
    Ok(curve.records().iter().map(|r| (r.delay, r.trials, r.survivors)).collect())
}

fn curve(rows: Vec<(f64, u64, u64)>) -> PyResult<SurvivalCurve> {
    SurvivalCurve::new(
        rows.into_iter()
            .map(|(delay, trials, survivors)| SurvivalRecord {
                delay,
                trials,
                survivors,
            })
            .collect(),
    )
    .py()
}

fn params(fit: &FitResult) -> Vec<(String, f64, f64)> {
    fit.params.iter().map(|p| (p.name.clone(), p.value, p.std_error)).collect()
}

/// `(name, value, std_error)` for the exponential fit of a survival curve.
#[pyfunction]
fn fit_exponential(rows: Vec<(f64, u64, u64)>) -> PyResult<Vec<(String, f64, f64)>> {
    Ok(params(&fit_exp(&curve(rows)?).py()?))
}

/// `(rate, std_error)` of Γ_on − Γ_off from two survival curves.
#[pyfunction]
fn srs_rate_from_curves(on: Vec<(f64, u64, u64)>, off: Vec<(f64, u64, u64)>) -> PyResult<(f64, f64)> {
    let a = fit_exp(&curve(on)?).py()?;
    let b = fit_exp(&curve(off)?).py()?;
    let r = extract_srs_rate(&a, &b).py()?;
    Ok((r.rate, r.std_error))
}

#[pymodule]
fn srslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpecies>()?;
    m.add_class::<PyDrive>()?;
    m.add_function(wrap_pyfunction!(srs_rate, m)?)?;
    m.add_function(wrap_pyfunction!(total_rate, m)?)?;
    m.add_function(wrap_pyfunction!(stark_shift, m)?)?;
    m.add_function(wrap_pyfunction!(differential_stark, m)?)?;
    m.add_function(wrap_pyfunction!(field_from_stark, m)?)?;
    m.add_function(wrap_pyfunction!(raman_rabi, m)?)?;
    m.add_function(wrap_pyfunction!(single_qubit_error, m)?)?;
    m.add_function(wrap_pyfunction!(best_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(table2, m)?)?;
    m.add_function(wrap_pyfunction!(wigner3j, m)?)?;
    m.add_function(wrap_pyfunction!(wigner6j, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_survival, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(srs_rate_from_curves, m)?)?;
    Ok(())
}
