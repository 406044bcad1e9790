//! Exponential survival fits and rate extraction by subtraction.

use nalgebra::{DMatrix, DVector};

use super::lm::{levenberg_marquardt, LmOptions};
use super::{FitParam, FitResult, SurvivalCurve};
use crate::error::{Error, Result};

/// Covariance model of the survival counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CountCovariance {
    /// One set of trials followed through every delay, so counts at
    /// different delays are correlated:
    /// Cov(S_i, S_j) = N p_j (1 − p_i) for t_i ≤ t_j.
    #[default]
    Nested,
    /// Fresh trials at every delay.
    Independent,
}

const P_CLAMP: f64 = 1e-9;
const IRLS_ROUNDS: usize = 6;

fn model(theta: &DVector<f64>, t: f64) -> f64 {
    theta[0] * (-theta[1].exp() * t).exp()
}

/// Weighted least squares of p(t) = A·exp(−Γt) with binomial weights
/// N/(p(1−p)) taken from the model and refreshed between solves. The rate
/// is parameterized as ln Γ. Standard errors come from the sandwich
/// covariance under the curve's count-covariance model.
pub fn fit_exponential(curve: &SurvivalCurve) -> Result<FitResult> {
    fit_exponential_with(curve, curve.covariance)
}

pub fn fit_exponential_with(curve: &SurvivalCurve, covariance: CountCovariance) -> Result<FitResult> {
    let recs = curve.records();
    let mut distinct = recs.iter().map(|r| r.delay).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateData("at least 3 distinct delays are required".into()));
    }
    let t: Vec<f64> = recs.iter().map(|r| r.delay).collect();
    let n: Vec<f64> = recs.iter().map(|r| r.trials as f64).collect();
    let p: Vec<f64> = recs
        .iter()
        .map(|r| r.survivors as f64 / r.trials as f64)
        .collect();
    if p.iter().all(|&x| (x - p[0]).abs() < 1e-15) {
        return Err(Error::DegenerateData("survival fraction is the same at every delay".into()));
    }
    if p.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateData("no survivors at any delay".into()));
    }

    let theta0 = initial_guess(&t, &p);
    let m = t.len();
    let mut theta = theta0;
    let opts = LmOptions::default();
    let mut weights = vec![0.0; m];
    let mut iterations = 0;
    for _ in 0..IRLS_ROUNDS {
        for k in 0..m {
            let pm = model(&theta, t[k]).clamp(P_CLAMP, 1.0 - P_CLAMP);
            weights[k] = n[k] / (pm * (1.0 - pm));
        }
        let w = weights.clone();
        let residual = |th: &DVector<f64>| {
            DVector::from_iterator(m, (0..m).map(|k| (model(th, t[k]) - p[k]) * w[k].sqrt()))
        };
        let jacobian = |th: &DVector<f64>| {
            let g = th[1].exp();
            DMatrix::from_fn(m, 2, |k, j| {
                let e = (-g * t[k]).exp();
                let d = if j == 0 { e } else { -th[0] * t[k] * g * e };
                d * w[k].sqrt()
            })
        };
        let sol = levenberg_marquardt(residual, Some(&jacobian), theta.clone(), &opts)?;
        iterations += sol.iterations;
        let shift = (&sol.params - &theta).amax();
        theta = sol.params;
        if shift < 1e-12 {
            break;
        }
    }

    for k in 0..m {
        let pm = model(&theta, t[k]).clamp(P_CLAMP, 1.0 - P_CLAMP);
        weights[k] = n[k] / (pm * (1.0 - pm));
    }
    let g = theta[1].exp();
    // unweighted model Jacobian in (A, ln Γ)
    let jac = DMatrix::from_fn(m, 2, |k, j| {
        let e = (-g * t[k]).exp();
        if j == 0 {
            e
        } else {
            -theta[0] * t[k] * g * e
        }
    });
    let w = DMatrix::from_diagonal(&DVector::from_vec(weights.clone()));
    let hess = jac.transpose() * &w * &jac;
    let hinv = hess
        .try_inverse()
        .ok_or_else(|| Error::DegenerateData("singular information matrix".into()))?;
    let cov = match covariance {
        CountCovariance::Independent => hinv,
        CountCovariance::Nested => {
            let pm: Vec<f64> = t.iter().map(|&tk| model(&theta, tk).clamp(P_CLAMP, 1.0 - P_CLAMP)).collect();
            let sigma = DMatrix::from_fn(m, m, |a, b| {
                let (early, late) = if t[a] <= t[b] { (a, b) } else { (b, a) };
                pm[late] * (1.0 - pm[early]) / (n[a] * n[b]).sqrt()
            });
            let bread = &hinv * jac.transpose() * &w;
            &bread * sigma * bread.transpose()
        }
    };
    let chi2: f64 = (0..m).map(|k| weights[k] * (model(&theta, t[k]) - p[k]).powi(2)).sum();
    let se_log_rate = cov[(1, 1)].max(0.0).sqrt();
    if !g.is_finite() || g <= 0.0 {
        return Err(Error::NonConvergence { iterations });
    }
    Ok(FitResult {
        params: vec![
            FitParam::new("rate", g, g * se_log_rate),
            FitParam::new("amplitude", theta[0], cov[(0, 0)].max(0.0).sqrt()),
        ],
        residual: chi2,
        converged: true,
        iterations,
    })
}

/// Log-linear regression on the points with nonzero survival.
fn initial_guess(t: &[f64], p: &[f64]) -> DVector<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(p)
        .filter(|(_, &pp)| pp > 0.0)
        .map(|(&tt, &pp)| (tt, pp.ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() > 0.0 { (n * sxy - sx * sy) / denom } else { -1.0 };
    let intercept = (sy - slope * sx) / n;
    let t_span = t.last().copied().unwrap_or(1.0) - t.first().copied().unwrap_or(0.0);
    let floor = 1e-3 / t_span.max(f64::MIN_POSITIVE);
    let rate = (-slope).max(floor);
    DVector::from_vec(vec![intercept.exp().clamp(1e-3, 1.0), rate.ln()])
}

/// Difference of an exposed and an unexposed decay rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrsRate {
    pub rate: f64,
    pub std_error: f64,
    /// Set when the difference is negative by more than its error.
    pub nonphysical: bool,
}

/// Γ_on − Γ_off with errors added in quadrature.
pub fn extract_srs_rate(fit_on: &FitResult, fit_off: &FitResult) -> Result<SrsRate> {
    if !fit_on.converged || !fit_off.converged {
        return Err(Error::InvalidArgument("both fits must have converged".into()));
    }
    let on = fit_on.param("rate")?;
    let off = fit_off.param("rate")?;
    let rate = on.value - off.value;
    let std_error = on.std_error.hypot(off.std_error);
    Ok(SrsRate {
        rate,
        std_error,
        nonphysical: rate < -std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::SurvivalRecord;

    fn noiseless(rate: f64, amp: f64, ts: &[f64], trials: u64) -> SurvivalCurve {
        let recs = ts
            .iter()
            .map(|&t| SurvivalRecord {
                delay: t,
                trials,
                survivors: (amp * (-rate * t).exp() * trials as f64).round() as u64,
            })
            .collect();
        SurvivalCurve::new(recs).unwrap()
    }

    #[test]
    fn exact_model_recovered() {
        let ts: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
        let curve = noiseless(1.0, 1.0, &ts, 1_000_000_000_000);
        let fit = fit_exponential(&curve).unwrap();
        assert!((fit.value("rate").unwrap() - 1.0).abs() < 1e-6);
        assert!((fit.value("amplitude").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn scale_equivariance() {
        let ts: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
        let a = noiseless(0.8, 0.97, &ts, 10_000);
        let scaled: Vec<f64> = ts.iter().map(|t| 3.0 * t).collect();
        let b = noiseless(0.8 / 3.0, 0.97, &scaled, 10_000);
        let ga = fit_exponential(&a).unwrap().value("rate").unwrap();
        let gb = fit_exponential(&b).unwrap().value("rate").unwrap();
        assert!((ga / gb - 3.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_inputs() {
        let ts = [0.1, 0.2, 0.3, 0.4];
        let all = noiseless(0.0, 1.0, &ts, 100);
        assert!(matches!(fit_exponential(&all), Err(Error::DegenerateData(_))));
        let two = noiseless(1.0, 1.0, &ts[..2], 100);
        assert!(matches!(fit_exponential(&two), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn subtraction() {
        let mk = |rate: f64, se: f64| FitResult {
            params: vec![FitParam::new("rate", rate, se), FitParam::new("amplitude", 1.0, 0.0)],
            residual: 0.0,
            converged: true,
            iterations: 1,
        };
        let r = extract_srs_rate(&mk(1.2, 0.03), &mk(0.2, 0.04)).unwrap();
        assert!((r.rate - 1.0).abs() < 1e-12);
        assert!((r.std_error - 0.05).abs() < 1e-12);
        assert!(!r.nonphysical);
        assert_eq!(extract_srs_rate(&mk(0.5, 0.1), &mk(0.5, 0.1)).unwrap().rate, 0.0);
        assert!(extract_srs_rate(&mk(0.2, 0.01), &mk(0.26, 0.01)).unwrap().nonphysical);
    }
}
