//! Damped Gauss–Newton (Levenberg–Marquardt) least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Convergence on the relative parameter step.
    pub relative_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            relative_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmSolution {
    pub params: DVector<f64>,
    /// Σ r² at the optimum.
    pub cost: f64,
    pub residuals: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
}

impl LmSolution {
    /// (JᵀJ)⁻¹, or `None` when singular.
    pub fn inverse_normal(&self) -> Option<DMatrix<f64>> {
        let jtj = self.jacobian.transpose() * &self.jacobian;
        jtj.try_inverse()
    }
}

/// Central-difference Jacobian.
pub fn numeric_jacobian<F>(f: &F, x: &DVector<f64>, r0: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut jac = DMatrix::zeros(r0.len(), x.len());
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1e-3);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Minimizes Σ r(x)² from `x0`. `jacobian` may be `None` for central
/// differences.
pub fn levenberg_marquardt<F>(
    residual: F,
    jacobian: Option<&dyn Fn(&DVector<f64>) -> DMatrix<f64>>,
    x0: DVector<f64>,
    options: &LmOptions,
) -> Result<LmSolution>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let jac_at = |x: &DVector<f64>, r: &DVector<f64>| match jacobian {
        Some(j) => j(x),
        None => numeric_jacobian(&residual, x, r),
    };
    let mut x = x0;
    let mut r = residual(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("residuals are not finite at the starting point".into()));
    }
    let mut cost = r.norm_squared();
    let mut jac = jac_at(&x, &r);
    let mut lambda = options.initial_damping;
    let n = x.len();

    for iteration in 1..=options.max_iterations {
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        if grad.amax() <= 1e-300 || cost == 0.0 {
            return Ok(LmSolution {
                params: x,
                cost,
                residuals: r,
                jacobian: jac,
                iterations: iteration,
            });
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for d in 0..n {
                let diag = jtj[(d, d)];
                a[(d, d)] += lambda * if diag > 0.0 { diag } else { 1.0 };
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let trial = &x + &step;
            let r_trial = residual(&trial);
            let c_trial = r_trial.norm_squared();
            if c_trial.is_finite() && c_trial <= cost {
                let small_step = step.norm() <= options.relative_tolerance * (x.norm() + options.relative_tolerance);
                let small_gain = cost - c_trial <= options.relative_tolerance * cost.max(f64::MIN_POSITIVE);
                x = trial;
                r = r_trial;
                cost = c_trial;
                jac = jac_at(&x, &r);
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if small_step || (small_gain && step.norm() <= 1e-6 * (x.norm() + 1e-6)) {
                    return Ok(LmSolution {
                        params: x,
                        cost,
                        residuals: r,
                        jacobian: jac,
                        iterations: iteration,
                    });
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !accepted {
            // no downhill step exists at any damping: a stationary point
            return Ok(LmSolution {
                params: x,
                cost,
                residuals: r,
                jacobian: jac,
                iterations: iteration,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &DVector<f64>| DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let sol = levenberg_marquardt(f, None, DVector::from_vec(vec![-1.2, 1.0]), &LmOptions::default()).unwrap();
        assert!((sol.params[0] - 1.0).abs() < 1e-8);
        assert!((sol.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_fit_matches_normal_equations() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.1, 2.9, 5.2, 7.1, 8.8];
        let f = |p: &DVector<f64>| DVector::from_iterator(5, xs.iter().zip(ys).map(|(x, y)| p[0] + p[1] * x - y));
        let sol = levenberg_marquardt(f, None, DVector::from_vec(vec![0.0, 0.0]), &LmOptions::default()).unwrap();
        // closed-form OLS
        let n = 5.0;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let a = (sy - b * sx) / n;
        assert!((sol.params[0] - a).abs() < 1e-8);
        assert!((sol.params[1] - b).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let f = |x: &DVector<f64>| DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let opts = LmOptions {
            max_iterations: 2,
            ..Default::default()
        };
        let err = levenberg_marquardt(f, None, DVector::from_vec(vec![-1.2, 1.0]), &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 2 }));
    }
}
