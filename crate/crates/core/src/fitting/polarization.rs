//! Polarization-angle fits from measured Rabi frequencies.
//!
//! Both fits have a free overall scale, which is profiled out analytically
//! during the search (variable projection) and restored for the reported
//! covariance. The objectives have reflection symmetries, so every fit is
//! multi-started and the optimum is mapped to a canonical representative.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::lm::{levenberg_marquardt, numeric_jacobian, LmOptions};
use super::{Channel, FitParam, FitResult, RabiMeasurement};
use crate::angular::{BeamGeometry, SecondBeamGeometry};
use crate::atomdata::SpeciesData;
use crate::couplings::{quadrupole_geometric_factors, Ket};
use crate::error::{Error, Result};
use crate::raman::raman_raw;
use crate::scattering::{Intermediates, LaserDrive, ScatterConfig};

/// Number of deterministic starting points per fit.
pub const MULTI_STARTS: usize = 8;

/// Geometry constraints for the two Raman beams. Beam 1 has k̂ in the x–z
/// plane and beam 2 in the y–z plane, so k̂·k̂′ = cos φ cos φ′.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RamanConstraint {
    /// k̂ ⊥ k̂′ at equal angles to the quantization axis: φ = φ′ = π/2.
    PerpendicularEqualAngle,
    /// φ = φ′ fitted.
    EqualAngle,
    /// All four angles fitted.
    Free,
    /// Both k̂ angles known.
    Fixed { phi: f64, phi2: f64 },
}

impl Default for RamanConstraint {
    fn default() -> Self {
        RamanConstraint::PerpendicularEqualAngle
    }
}

/// Residual weights: 1/σ when every σ is positive, otherwise uniform.
fn weights(data: &[f64], sigma: &[f64]) -> Vec<f64> {
    if sigma.iter().all(|&s| s > 0.0) {
        sigma.iter().map(|s| 1.0 / s).collect()
    } else {
        let top = data.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        vec![1.0 / top.max(f64::MIN_POSITIVE); data.len()]
    }
}

fn profiled_scale(y: &[f64], g: &[f64], w: &[f64]) -> f64 {
    let (num, den) = y
        .iter()
        .zip(g)
        .zip(w)
        .fold((0.0, 0.0), |(n, d), ((y, g), w)| (n + w * w * y * g, d + w * w * g * g));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Kronecker low-discrepancy point `k` in the box `bounds`.
fn start_point(k: usize, bounds: &[(f64, f64)]) -> DVector<f64> {
    const ALPHA: [f64; 4] = [0.618_033_988_749_895, 0.754_877_666_246_693, 0.569_840_290_998_053, 0.671_043_606_703_789];
    DVector::from_iterator(
        bounds.len(),
        bounds.iter().enumerate().map(|(d, &(lo, hi))| {
            let u = ((k as f64 + 0.5) * ALPHA[d % 4]).fract();
            lo + (hi - lo) * u
        }),
    )
}

struct Problem<'a> {
    y: Vec<f64>,
    w: Vec<f64>,
    absolute_sigma: bool,
    /// Unit-scale predictions for the nonlinear parameters.
    model: Box<dyn Fn(&DVector<f64>) -> Result<Vec<f64>> + Sync + 'a>,
    bounds: Vec<(f64, f64)>,
}

struct Optimum {
    theta: DVector<f64>,
    scale: f64,
    cost: f64,
    iterations: usize,
}

impl Problem<'_> {
    fn projected_residual(&self, theta: &DVector<f64>) -> DVector<f64> {
        let m = self.y.len();
        match (self.model)(theta) {
            Ok(g) => {
                let s = profiled_scale(&self.y, &g, &self.w);
                DVector::from_iterator(m, (0..m).map(|k| self.w[k] * (self.y[k] - s * g[k])))
            }
            Err(_) => DVector::from_element(m, f64::NAN),
        }
    }

    fn solve(&self) -> Result<Optimum> {
        let opts = LmOptions::default();
        let runs: Vec<Result<Optimum>> = (0..MULTI_STARTS)
            .into_par_iter()
            .map(|k| {
                let x0 = start_point(k, &self.bounds);
                let residual = |th: &DVector<f64>| self.projected_residual(th);
                let sol = levenberg_marquardt(residual, None, x0, &opts)?;
                let g = (self.model)(&sol.params)?;
                Ok(Optimum {
                    scale: profiled_scale(&self.y, &g, &self.w),
                    theta: sol.params,
                    cost: sol.cost,
                    iterations: sol.iterations,
                })
            })
            .collect();
        let mut best: Option<Optimum> = None;
        let mut first_err = None;
        for run in runs {
            match run {
                Ok(o) if o.cost.is_finite() => {
                    // strict comparison keeps the lowest seed index on ties
                    if best.as_ref().is_none_or(|b| o.cost < b.cost) {
                        best = Some(o);
                    }
                }
                Ok(o) => {
                    first_err.get_or_insert(Error::NonConvergence { iterations: o.iterations });
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        best.ok_or_else(|| first_err.unwrap_or(Error::NonConvergence { iterations: 0 }))
    }

    /// Standard errors of (scale, θ…) from the full Jacobian at the optimum.
    fn std_errors(&self, opt: &Optimum) -> Result<Vec<f64>> {
        let m = self.y.len();
        let mut x = DVector::zeros(opt.theta.len() + 1);
        x[0] = opt.scale;
        x.rows_mut(1, opt.theta.len()).copy_from(&opt.theta);
        let full = |p: &DVector<f64>| {
            let theta = p.rows(1, p.len() - 1).into_owned();
            match (self.model)(&theta) {
                Ok(g) => DVector::from_iterator(m, (0..m).map(|k| self.w[k] * (self.y[k] - p[0] * g[k]))),
                Err(_) => DVector::from_element(m, f64::NAN),
            }
        };
        let r0 = full(&x);
        let jac: DMatrix<f64> = numeric_jacobian(&full, &x, &r0);
        let info = jac.transpose() * &jac;
        let inv = info
            .clone()
            .pseudo_inverse(1e-12 * info.amax().max(f64::MIN_POSITIVE))
            .map_err(|e| Error::Unidentifiable(e.to_string()))?;
        let p = x.len();
        let factor = if self.absolute_sigma {
            1.0
        } else if m > p {
            r0.norm_squared() / (m - p) as f64
        } else {
            0.0
        };
        Ok((0..p).map(|i| (inv[(i, i)] * factor).max(0.0).sqrt()).collect())
    }
}

fn wrap_half_turn(x: f64) -> f64 {
    // into (−π/2, π/2]
    let r = (x + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

/// Fits the polarization angle γ (and φ when `phi` is `None`) of a
/// quadrupole beam to Rabi frequencies labelled by |Δm|.
///
/// Angles are reported in [0, π/2], which covers every distinct set of
/// geometric factors.
pub fn fit_polarization_e2(measured: &[RabiMeasurement], phi: Option<f64>) -> Result<FitResult> {
    let mut dm = Vec::with_capacity(measured.len());
    for m in measured {
        match m.channel {
            Channel::DeltaM(d) => dm.push(d as usize),
            Channel::Pair(..) => {
                return Err(Error::InvalidArgument(format!(
                    "quadrupole fit expects Δm channels, got {}",
                    m.channel
                )))
            }
        }
    }
    let mut distinct = dm.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let needed = if phi.is_some() { 2 } else { 3 };
    if distinct.len() < needed {
        return Err(Error::Unidentifiable(format!(
            "{} distinct Δm channel(s), need {needed}",
            distinct.len()
        )));
    }
    if measured
        .iter()
        .zip(&dm)
        .filter(|(_, &d)| d == 1 || d == 2)
        .all(|(m, _)| m.rabi == 0.0)
    {
        return Err(Error::Unidentifiable("Δm = 1 and Δm = 2 Rabi frequencies all vanish".into()));
    }
    let y: Vec<f64> = measured.iter().map(|m| m.rabi).collect();
    let sigma: Vec<f64> = measured.iter().map(|m| m.sigma).collect();
    let dm_model = dm.clone();
    let problem = Problem {
        w: weights(&y, &sigma),
        absolute_sigma: sigma.iter().all(|&s| s > 0.0),
        y,
        model: Box::new(move |th: &DVector<f64>| {
            let ph = phi.unwrap_or_else(|| th[1]);
            let g = quadrupole_geometric_factors(ph, th[0]);
            Ok(dm_model.iter().map(|&d| g[d]).collect())
        }),
        bounds: if phi.is_some() {
            vec![(0.0, FRAC_PI_2)]
        } else {
            vec![(0.0, FRAC_PI_2), (0.0, FRAC_PI_2)]
        },
    };
    let mut opt = problem.solve()?;
    // geometric factors are even in γ and φ and invariant under γ → π − γ, φ → π − φ
    let fold = |x: f64| wrap_half_turn(x).abs();
    opt.theta[0] = fold(opt.theta[0]);
    if phi.is_none() {
        opt.theta[1] = fold(opt.theta[1]);
    }
    let se = problem.std_errors(&opt)?;
    let mut params = vec![FitParam::new("gamma", opt.theta[0], se[1])];
    match phi {
        Some(p) => params.push(FitParam::new("phi", p, 0.0)),
        None => params.push(FitParam::new("phi", opt.theta[1], se[2])),
    }
    params.push(FitParam::new("scale", opt.scale, se[0]));
    Ok(FitResult {
        params,
        residual: opt.cost,
        converged: true,
        iterations: opt.iterations,
    })
}

/// Maps fitted Raman angles (φ, γ, φ′, γ′) to a canonical representative
/// of their symmetry class. With real polarizations the magnitudes |Ω| are
/// unchanged by
///
/// * reversing one k̂ with its γ negated, (φ, γ) → (φ + π, −γ);
/// * the mirror x → −x, (φ, γ, φ′, γ′) → (π − φ, γ, φ′, −γ′);
/// * the mirror y → −y, (φ, γ, φ′, γ′) → (φ, −γ, π − φ′, γ′);
///
/// together with ε → −ε. Canonical angles satisfy φ, φ′ ∈ [0, π/2] and
/// γ, γ′ ∈ (−π/2, π/2], with γ′ ≥ 0 when φ = π/2 and γ ≥ 0 when φ′ = π/2.
fn canonical_raman(constraint: RamanConstraint, mut a: [f64; 4]) -> [f64; 4] {
    let [phi, gamma, phi2, gamma2] = &mut a;
    if matches!(constraint, RamanConstraint::EqualAngle | RamanConstraint::Free) {
        for (p, g) in [(&mut *phi, &mut *gamma), (&mut *phi2, &mut *gamma2)] {
            let r = p.rem_euclid(2.0 * PI);
            if r >= PI {
                *p = r - PI;
                *g = -*g;
            } else {
                *p = r;
            }
        }
        // EqualAngle applies both mirrors together, which keeps φ = φ′
        if *phi2 > FRAC_PI_2 {
            *phi2 = PI - *phi2;
            *gamma = -*gamma;
        }
        if *phi > FRAC_PI_2 {
            *phi = PI - *phi;
            *gamma2 = -*gamma2;
        }
    }
    *gamma = wrap_half_turn(*gamma);
    *gamma2 = wrap_half_turn(*gamma2);
    let at_half = |x: f64| (x - FRAC_PI_2).abs() < 1e-9;
    if at_half(*phi) {
        *gamma2 = wrap_half_turn(gamma2.abs());
    }
    if at_half(*phi2) {
        *gamma = wrap_half_turn(gamma.abs());
    }
    a
}

/// Fits the two Raman beam geometries to measured Rabi frequencies of
/// labelled state pairs. Beam 1 is the first drive of every transition.
/// Returns parameters `gamma`, `phi`, `gamma2`, `phi2` and `scale`, where
/// `scale` multiplies the Rabi frequency at unit field amplitudes.
pub fn fit_polarization_raman(
    species: &SpeciesData,
    measured: &[RabiMeasurement],
    omega: f64,
    constraint: RamanConstraint,
    cfg: &ScatterConfig,
) -> Result<FitResult> {
    let mut pairs = Vec::with_capacity(measured.len());
    for m in measured {
        match &m.channel {
            Channel::Pair(a, b) => pairs.push((Ket::resolve(species, a)?, Ket::resolve(species, b)?)),
            Channel::DeltaM(_) => {
                return Err(Error::InvalidArgument(format!(
                    "Raman fit expects state-pair channels, got {}",
                    m.channel
                )))
            }
        }
    }
    let n_angles = match constraint {
        RamanConstraint::PerpendicularEqualAngle | RamanConstraint::Fixed { .. } => 2,
        RamanConstraint::EqualAngle => 3,
        RamanConstraint::Free => 4,
    };
    let mut distinct: Vec<_> = measured.iter().map(|m| m.channel.to_string()).collect();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < n_angles + 1 {
        return Err(Error::Unidentifiable(format!(
            "{} distinct transition(s), need at least {}",
            distinct.len(),
            n_angles + 1
        )));
    }
    if measured.iter().all(|m| m.rabi == 0.0) {
        return Err(Error::Unidentifiable("all Rabi frequencies vanish".into()));
    }
    let inter = Intermediates::new(species, cfg)?;
    let angles = move |th: &DVector<f64>| -> [f64; 4] {
        match constraint {
            RamanConstraint::PerpendicularEqualAngle => [FRAC_PI_2, th[0], FRAC_PI_2, th[1]],
            RamanConstraint::Fixed { phi, phi2 } => [phi, th[0], phi2, th[1]],
            RamanConstraint::EqualAngle => [th[2], th[0], th[2], th[1]],
            RamanConstraint::Free => [th[2], th[0], th[3], th[1]],
        }
    };
    let y: Vec<f64> = measured.iter().map(|m| m.rabi).collect();
    let sigma: Vec<f64> = measured.iter().map(|m| m.sigma).collect();
    let inter_ref = &inter;
    let pairs_ref = &pairs;
    let problem = Problem {
        w: weights(&y, &sigma),
        absolute_sigma: sigma.iter().all(|&s| s > 0.0),
        y,
        model: Box::new(move |th: &DVector<f64>| {
            let [phi, gamma, phi2, gamma2] = angles(th);
            let d1 = LaserDrive::new(omega, 1.0, BeamGeometry::new(phi, gamma).polarization())?;
            let d2 = LaserDrive::new(omega, 1.0, SecondBeamGeometry::new(phi2, gamma2).polarization())?;
            pairs_ref
                .iter()
                .map(|&(a, b)| raman_raw(species, inter_ref, a, b, &d1, &d2))
                .collect()
        }),
        bounds: {
            let mut b = vec![(-FRAC_PI_2, FRAC_PI_2); 2];
            b.extend(std::iter::repeat_n((0.0, PI), n_angles - 2));
            b
        },
    };
    // work in a scale where unit-field predictions are O(1)
    let probe = (problem.model)(&start_point(0, &problem.bounds))?;
    let unit = probe.iter().fold(0.0f64, |a, &b| a.max(b));
    if !(unit > 0.0) {
        return Err(Error::Unidentifiable("no measured transition is Raman-coupled".into()));
    }
    let mut opt = problem.solve()?;
    let [phi, gamma, phi2, gamma2] = canonical_raman(constraint, angles(&opt.theta));
    let canonical = match constraint {
        RamanConstraint::PerpendicularEqualAngle | RamanConstraint::Fixed { .. } => vec![gamma, gamma2],
        RamanConstraint::EqualAngle => vec![gamma, gamma2, phi],
        RamanConstraint::Free => vec![gamma, gamma2, phi, phi2],
    };
    opt.theta = DVector::from_vec(canonical);
    let se = problem.std_errors(&opt)?;
    let (se_phi, se_phi2) = match constraint {
        RamanConstraint::EqualAngle => (se[3], se[3]),
        RamanConstraint::Free => (se[3], se[4]),
        _ => (0.0, 0.0),
    };
    Ok(FitResult {
        params: vec![
            FitParam::new("gamma", gamma, se[1]),
            FitParam::new("phi", phi, se_phi),
            FitParam::new("gamma2", gamma2, se[2]),
            FitParam::new("phi2", phi2, se_phi2),
            FitParam::new("scale", opt.scale, se[0]),
        ],
        residual: opt.cost,
        converged: true,
        iterations: opt.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomdata::HyperfineState;
    use crate::gates::{reference_resonance, OperatingPoint};

    fn e2_data(phi: f64, gamma: f64, scale: f64, channels: &[u8]) -> Vec<RabiMeasurement> {
        let g = quadrupole_geometric_factors(phi, gamma);
        channels
            .iter()
            .map(|&d| RabiMeasurement::new(Channel::DeltaM(d), scale * g[d as usize], 0.0))
            .collect()
    }

    #[test]
    fn e2_round_trip_fixed_phi() {
        for gamma in [0.045, 0.3, 1.2] {
            let data = e2_data(FRAC_PI_2, gamma, 2.5e5, &[0, 1, 2]);
            let fit = fit_polarization_e2(&data, Some(FRAC_PI_2)).unwrap();
            assert!((fit.value("gamma").unwrap() - gamma).abs() < 1e-6, "{gamma}");
            assert!((fit.value("scale").unwrap() / 2.5e5 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn e2_zero_gamma() {
        let data = e2_data(FRAC_PI_2, 0.0, 1.0, &[1, 2]);
        let fit = fit_polarization_e2(&data, Some(FRAC_PI_2)).unwrap();
        assert!(fit.value("gamma").unwrap().abs() < 1e-4);
    }

    #[test]
    fn e2_free_phi_reproduces_ratios() {
        // two ratios and two angles admit discrete ambiguities, so compare
        // the fitted geometric factors rather than the angles
        let data = e2_data(1.1, 0.4, 1.0, &[0, 1, 2]);
        let fit = fit_polarization_e2(&data, None).unwrap();
        let g = quadrupole_geometric_factors(fit.value("phi").unwrap(), fit.value("gamma").unwrap());
        let s = fit.value("scale").unwrap();
        for m in &data {
            let Channel::DeltaM(d) = m.channel else { unreachable!() };
            assert!((s * g[d as usize] - m.rabi).abs() < 1e-8);
        }
        let phi = fit.value("phi").unwrap();
        assert!((0.0..=FRAC_PI_2).contains(&phi));
    }

    #[test]
    fn e2_unidentifiable() {
        let data = e2_data(FRAC_PI_2, 0.2, 1.0, &[1]);
        assert!(matches!(fit_polarization_e2(&data, Some(FRAC_PI_2)), Err(Error::Unidentifiable(_))));
        let zeros = vec![
            RabiMeasurement::new(Channel::DeltaM(1), 0.0, 0.0),
            RabiMeasurement::new(Channel::DeltaM(2), 0.0, 0.0),
        ];
        assert!(matches!(fit_polarization_e2(&zeros, Some(FRAC_PI_2)), Err(Error::Unidentifiable(_))));
    }

    #[test]
    fn raman_canonical_forms() {
        let c = canonical_raman(RamanConstraint::PerpendicularEqualAngle, [FRAC_PI_2, -0.1, FRAC_PI_2, -0.2]);
        assert!((c[1] - 0.1).abs() < 1e-15 && (c[3] - 0.2).abs() < 1e-15);
        let c = canonical_raman(RamanConstraint::Free, [1.0 + PI, 0.3, 2.0, PI - 0.2]);
        assert!((0.0..=FRAC_PI_2).contains(&c[0]) && (0.0..=FRAC_PI_2).contains(&c[2]));
        assert!(c[1] > -FRAC_PI_2 && c[1] <= FRAC_PI_2);
    }

    #[test]
    fn raman_single_transition_unidentifiable() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let cfg = ScatterConfig::for_species(&ba);
        let omega = OperatingPoint::NEAR_RED.omega(reference_resonance(&ba, "5D5/2", &cfg).unwrap());
        let data = vec![RabiMeasurement::new(
            Channel::Pair(HyperfineState::parse("5D5/2:1,0").unwrap(), HyperfineState::parse("5D5/2:3,0").unwrap()),
            1.0,
            0.0,
        )];
        let err = fit_polarization_raman(&ba, &data, omega, RamanConstraint::default(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Unidentifiable(_)));
    }

    fn raman_data(gamma: f64, gamma2: f64, swap: bool) -> (SpeciesData, ScatterConfig, f64, Vec<RabiMeasurement>) {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let cfg = ScatterConfig::for_species(&ba);
        let omega = OperatingPoint::NEAR_RED.omega(reference_resonance(&ba, "5D5/2", &cfg).unwrap());
        let (g1, g2) = if swap { (gamma2, gamma) } else { (gamma, gamma2) };
        let d1 = LaserDrive::new(omega, 3e5, BeamGeometry::new(FRAC_PI_2, g1).polarization()).unwrap();
        let d2 = LaserDrive::new(omega, 3e5, SecondBeamGeometry::new(FRAC_PI_2, g2).polarization()).unwrap();
        let inter = Intermediates::new(&ba, &cfg).unwrap();
        let pairs = ["1,0->3,0", "1,0->3,1", "1,0->3,2", "1,1->3,-1", "2,0->4,1", "3,-1->4,-3", "2,2->3,3"];
        let data = pairs
            .iter()
            .map(|p| {
                let (a, b) = p.split_once("->").unwrap();
                let a = HyperfineState::parse(&format!("5D5/2:{a}")).unwrap();
                let b = HyperfineState::parse(&format!("5D5/2:{b}")).unwrap();
                let w = raman_raw(&ba, &inter, Ket::resolve(&ba, &a).unwrap(), Ket::resolve(&ba, &b).unwrap(), &d1, &d2).unwrap();
                RabiMeasurement::new(Channel::Pair(a, b), w, 0.0)
            })
            .collect();
        (ba, cfg, omega, data)
    }

    #[test]
    fn raman_round_trip_and_exchange() {
        let (ba, cfg, omega, data) = raman_data(0.105, 0.3, false);
        let fit = fit_polarization_raman(&ba, &data, omega, RamanConstraint::default(), &cfg).unwrap();
        assert!((fit.value("gamma").unwrap() - 0.105).abs() < 1e-6, "{fit:?}");
        assert!((fit.value("gamma2").unwrap() - 0.3).abs() < 1e-6, "{fit:?}");
        let (_, _, _, swapped) = raman_data(0.105, 0.3, true);
        let fit = fit_polarization_raman(&ba, &swapped, omega, RamanConstraint::default(), &cfg).unwrap();
        assert!((fit.value("gamma").unwrap() - 0.3).abs() < 1e-6, "{fit:?}");
        assert!((fit.value("gamma2").unwrap() - 0.105).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn raman_scale_invariance() {
        let (ba, cfg, omega, data) = raman_data(0.105, 0.105, false);
        let scaled: Vec<_> = data.iter().map(|m| RabiMeasurement::new(m.channel.clone(), 7.5 * m.rabi, 0.0)).collect();
        let a = fit_polarization_raman(&ba, &data, omega, RamanConstraint::default(), &cfg).unwrap();
        let b = fit_polarization_raman(&ba, &scaled, omega, RamanConstraint::default(), &cfg).unwrap();
        assert!((a.value("gamma").unwrap() - b.value("gamma").unwrap()).abs() < 1e-8);
        assert!((b.value("scale").unwrap() / a.value("scale").unwrap() - 7.5).abs() < 1e-8);
    }

    #[test]
    fn raman_symmetries_hold() {
        let ba = SpeciesData::builtin("ba137").unwrap();
        let cfg = ScatterConfig::for_species(&ba);
        let inter = Intermediates::new(&ba, &cfg).unwrap();
        let omega = OperatingPoint::NEAR_RED.omega(reference_resonance(&ba, "5D5/2", &cfg).unwrap());
        let kets: Vec<(Ket, Ket)> = [("1,0", "3,1"), ("2,-1", "3,1"), ("4,2", "3,3"), ("1,1", "2,0")]
            .iter()
            .map(|(a, b)| {
                let a = HyperfineState::parse(&format!("5D5/2:{a}")).unwrap();
                let b = HyperfineState::parse(&format!("5D5/2:{b}")).unwrap();
                (Ket::resolve(&ba, &a).unwrap(), Ket::resolve(&ba, &b).unwrap())
            })
            .collect();
        let eval = |[phi, gamma, phi2, gamma2]: [f64; 4]| -> Vec<f64> {
            let d1 = LaserDrive::new(omega, 1.0, BeamGeometry::new(phi, gamma).polarization()).unwrap();
            let d2 = LaserDrive::new(omega, 1.0, SecondBeamGeometry::new(phi2, gamma2).polarization()).unwrap();
            kets.iter().map(|&(a, b)| raman_raw(&ba, &inter, a, b, &d1, &d2).unwrap()).collect()
        };
        let x = [1.2, 0.3, 0.7, -0.4];
        let base = eval(x);
        assert!(base.iter().any(|&v| v > 0.0));
        for image in [
            [x[0] + PI, -x[1], x[2], x[3]],
            [PI - x[0], x[1], x[2], -x[3]],
            [x[0], -x[1], PI - x[2], x[3]],
            canonical_raman(RamanConstraint::Free, x),
        ] {
            for (u, v) in base.iter().zip(eval(image)) {
                assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-300), "{image:?}");
            }
        }
    }
}
