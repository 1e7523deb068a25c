//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when `|step| <= relative_step * (|x| + relative_step)`.
    pub relative_step: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            relative_step: 1e-9,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    /// `s^2 (J^T J)^-1` with `s^2 = RSS / (m - n)`; zero when `m == n`.
    pub covariance: DMatrix<f64>,
    pub iterations: usize,
}

/// Minimizes `|r(x)|^2` from `x0` given residual and Jacobian closures.
pub fn levenberg_marquardt<R, J>(residual: R, jacobian: J, x0: DVector<f64>, opts: LmOptions) -> Result<LmSolution>
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = x0;
    let mut r = residual(&x);
    let m = r.len();
    let n = x.len();
    if m < n {
        return Err(Error::Underdetermined { rows: m, needed: n });
    }
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::NonFinite("initial residual"));
    }
    let mut damping = opts.initial_damping;

    for iteration in 1..=opts.max_iterations {
        let jac = jacobian(&x);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.norm() == 0.0 || cost == 0.0 {
            return finish(x, r, &jac, iteration);
        }
        let mut accepted = false;
        while damping < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += damping * jtj[(i, i)].max(f64::MIN_POSITIVE);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    damping *= 10.0;
                    continue;
                }
            };
            let trial = &x + &step;
            let r_trial = residual(&trial);
            let trial_cost = r_trial.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let small = step.norm() <= opts.relative_step * (x.norm() + opts.relative_step);
                x = trial;
                r = r_trial;
                cost = trial_cost;
                damping = (damping / 10.0).max(1e-12);
                accepted = true;
                if small {
                    let jac = jacobian(&x);
                    return finish(x, r, &jac, iteration);
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // no descent direction left at machine precision: a minimum
            return finish(x, r, &jac, iteration);
        }
    }
    Err(Error::NoConvergence(opts.max_iterations))
}

fn finish(x: DVector<f64>, r: DVector<f64>, jac: &DMatrix<f64>, iterations: usize) -> Result<LmSolution> {
    let m = r.len();
    let n = x.len();
    let jtj = jac.transpose() * jac;
    let inverse = jtj
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("singular normal matrix at the solution".into()))?;
    let s2 = if m > n { r.norm_squared() / (m - n) as f64 } else { 0.0 };
    Ok(LmSolution {
        x,
        residual_norm: r.norm(),
        covariance: inverse * s2,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential_decay() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let res = |p: &DVector<f64>| {
            DVector::from_iterator(t.len(), t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() - y))
        };
        let jac = |p: &DVector<f64>| {
            DMatrix::from_fn(t.len(), 2, |i, j| {
                let e = (-p[1] * t[i]).exp();
                if j == 0 {
                    e
                } else {
                    -p[0] * t[i] * e
                }
            })
        };
        let sol = levenberg_marquardt(res, jac, DVector::from_vec(vec![1.0, 0.5]), LmOptions::default()).unwrap();
        assert!((sol.x[0] - 2.5).abs() < 1e-8);
        assert!((sol.x[1] - 1.3).abs() < 1e-8);
        assert!(sol.residual_norm < 1e-8);
    }

    #[test]
    fn rejects_underdetermined() {
        let res = |p: &DVector<f64>| DVector::from_vec(vec![p[0] + p[1]]);
        let jac = |_: &DVector<f64>| DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let r = levenberg_marquardt(res, jac, DVector::zeros(2), LmOptions::default());
        assert!(matches!(r, Err(Error::Underdetermined { .. })));
    }
}
