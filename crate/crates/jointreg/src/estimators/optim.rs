//! Quasi-Newton maximization on unconstrained coordinates, with
//! finite-difference derivatives and observed-information extraction.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Objective wrapper: `f` returns the value to MAXIMIZE, or None when the
/// point is outside the likelihood's numeric domain. An optional fused
/// gradient avoids finite differences where an analytic score is available.
pub struct Objective<'a> {
    pub f: &'a dyn Fn(&[f64]) -> Option<f64>,
    pub grad: Option<&'a dyn Fn(&[f64]) -> Option<(f64, Vec<f64>)>>,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub struct BfgsOptions {
    pub max_iter: usize,
    /// Convergence when ‖∇f‖∞ ≤ grad_tol · max(1, |f|).
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-8,
        }
    }
}

fn fd_gradient(obj: &Objective, x: &[f64], fx: f64) -> Option<Vec<f64>> {
    if let Some(g) = obj.grad {
        return g(x).map(|(_, grad)| grad);
    }
    let mut grad = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = (obj.f)(&xp);
        xp[i] = x[i] - h;
        let fm = (obj.f)(&xp);
        xp[i] = x[i];
        grad[i] = match (fp, fm) {
            (Some(fp), Some(fm)) => (fp - fm) / (2.0 * h),
            (Some(fp), None) => (fp - fx) / h,
            (None, Some(fm)) => (fx - fm) / h,
            (None, None) => return None,
        };
    }
    Some(grad)
}

/// BFGS ascent. Maximizes `obj` starting from `x0`.
pub fn maximize_bfgs(obj: &Objective, x0: &[f64], opts: &BfgsOptions) -> Result<OptimResult> {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = (obj.f)(x.as_slice())
        .ok_or_else(|| Error::convergence("objective undefined at starting values"))?;
    let mut grad = DVector::from_vec(
        fd_gradient(obj, x.as_slice(), fx)
            .ok_or_else(|| Error::convergence("gradient undefined at starting values"))?,
    );
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let gnorm = grad.amax();
        if gnorm <= opts.grad_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut dir = &h_inv * &grad;
        if dir.dot(&grad) <= 0.0 {
            // reset on loss of ascent direction
            h_inv = DMatrix::identity(n, n);
            dir = grad.clone();
        }
        // backtracking line search with Armijo condition
        let slope = dir.dot(&grad);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &x + &dir * t;
            if let Some(fc) = (obj.f)(cand.as_slice()) {
                if fc >= fx + 1e-4 * t * slope && fc.is_finite() {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no progress possible along this direction
            break;
        };
        let g_new = match fd_gradient(obj, x_new.as_slice(), f_new) {
            Some(g) => DVector::from_vec(g),
            None => break,
        };
        let s = &x_new - &x;
        let y = &g_new - &grad;
        let sy = s.dot(&y);
        // BFGS update on the inverse Hessian of −f. In ascent convention the
        // curvature condition is s·y < 0; substituting ỹ = −y into the
        // minimization update gives the coefficients below.
        if sy < -1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            let term1 = (&s * s.transpose()) * (rho * rho * yhy - rho);
            let term2 = (&hy * s.transpose() + &s * hy.transpose()) * rho;
            h_inv = h_inv + term1 - term2;
        }
        let stalled = (f_new - fx).abs() <= 1e-12 * fx.abs().max(1.0) && s.amax() < 1e-10;
        x = x_new;
        fx = f_new;
        grad = g_new;
        if stalled {
            converged = grad.amax() <= 1e-5 * fx.abs().max(1.0);
            break;
        }
    }
    if !converged {
        converged = grad.amax() <= opts.grad_tol * fx.abs().max(1.0);
    }
    Ok(OptimResult {
        x: x.as_slice().to_vec(),
        value: fx,
        gradient: grad.as_slice().to_vec(),
        iterations,
        converged,
    })
}

/// Maximize with jittered restarts: on failure or non-convergence the start
/// is perturbed and the best converged attempt wins.
pub fn maximize_with_restarts(
    obj: &Objective,
    x0: &[f64],
    opts: &BfgsOptions,
    restarts: usize,
    seed: u64,
) -> Result<OptimResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<OptimResult> = None;
    let mut start = x0.to_vec();
    for attempt in 0..=restarts {
        match maximize_bfgs(obj, &start, opts) {
            Ok(res) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (res.converged && !b.converged)
                            || (res.converged == b.converged && res.value > b.value)
                    }
                };
                if better {
                    best = Some(res.clone());
                }
                if res.converged && attempt == 0 {
                    break;
                }
                if best.as_ref().is_some_and(|b| b.converged) {
                    break;
                }
            }
            Err(_) if attempt < restarts => {}
            Err(e) => {
                if best.is_none() {
                    return Err(e);
                }
            }
        }
        // jitter for the next attempt
        start = x0
            .iter()
            .map(|&v| v + rng.gen_range(-0.3..0.3) * (1.0 + v.abs()) * 0.3)
            .collect();
    }
    best.ok_or_else(|| Error::convergence("all optimization attempts failed"))
}

/// Observed information (negative Hessian of the log-likelihood) by central
/// finite differences at the optimum.
pub fn observed_information(obj: &Objective, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let f0 = (obj.f)(x).ok_or_else(|| Error::convergence("objective undefined at optimum"))?;
    let eval = |p: &[f64]| (obj.f)(p);
    let h: Vec<f64> = x.iter().map(|&v| 1e-4 * (1.0 + v.abs())).collect();
    let mut hess = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + h[i];
        let fp = eval(&xp).ok_or_else(|| Error::convergence("hessian probe out of domain"))?;
        xp[i] = x[i] - h[i];
        let fm = eval(&xp).ok_or_else(|| Error::convergence("hessian probe out of domain"))?;
        xp[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut probe = |si: f64, sj: f64| -> Result<f64> {
                xp[i] = x[i] + si * h[i];
                xp[j] = x[j] + sj * h[j];
                let v = eval(&xp)
                    .ok_or_else(|| Error::convergence("hessian probe out of domain"));
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (probe(1.0, 1.0)? - probe(1.0, -1.0)? - probe(-1.0, 1.0)?
                + probe(-1.0, -1.0)?)
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(-hess)
}

/// Invert an observed information matrix into a covariance matrix,
/// flooring eigenvalues at 1e-10 when it is not positive definite.
/// Returns (vcov, repaired_flag).
pub fn information_to_vcov(info: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    let sym = (info + info.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut repaired = false;
    let floored: DVector<f64> = eig.eigenvalues.map(|l| {
        if l <= 1e-10 {
            repaired = true;
            1e-10
        } else {
            l
        }
    });
    let inv_diag = DMatrix::from_diagonal(&floored.map(|l| 1.0 / l));
    let vcov = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    Ok((vcov, repaired))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| Some(-(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2));
        let obj = Objective { f: &f, grad: None };
        let res = maximize_bfgs(&obj, &[5.0, 5.0], &BfgsOptions::default()).unwrap();
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-6);
        assert!((res.x[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_valley() {
        let f = |x: &[f64]| {
            Some(-((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)))
        };
        let obj = Objective { f: &f, grad: None };
        let res = maximize_bfgs(
            &obj,
            &[-1.2, 1.0],
            &BfgsOptions {
                max_iter: 500,
                grad_tol: 1e-8,
            },
        )
        .unwrap();
        assert!((res.x[0] - 1.0).abs() < 1e-4, "{:?}", res.x);
        assert!((res.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn fused_gradient_path() {
        let f = |x: &[f64]| Some(-(x[0] * x[0] + x[1] * x[1]));
        let g = |x: &[f64]| {
            Some((
                -(x[0] * x[0] + x[1] * x[1]),
                vec![-2.0 * x[0], -2.0 * x[1]],
            ))
        };
        let obj = Objective { f: &f, grad: Some(&g) };
        let res = maximize_bfgs(&obj, &[3.0, -2.0], &BfgsOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.x[0].abs() < 1e-7 && res.x[1].abs() < 1e-7);
    }

    #[test]
    fn restarts_recover_from_bad_start() {
        // undefined region around the default start forces a jitter
        let f = |x: &[f64]| {
            if x[0].abs() < 0.05 && x[0] != 0.2 {
                None
            } else {
                Some(-(x[0] - 2.0).powi(2))
            }
        };
        let obj = Objective { f: &f, grad: None };
        let res = maximize_with_restarts(&obj, &[0.0], &BfgsOptions::default(), 3, 7);
        assert!(res.is_ok());
    }

    #[test]
    fn information_and_vcov() {
        // −f has Hessian diag(2, 4) ⇒ info = diag(2,4), vcov = diag(0.5, 0.25)
        let f = |x: &[f64]| Some(-(x[0] * x[0]) - 2.0 * x[1] * x[1]);
        let obj = Objective { f: &f, grad: None };
        let info = observed_information(&obj, &[0.0, 0.0]).unwrap();
        assert!((info[(0, 0)] - 2.0).abs() < 1e-5);
        assert!((info[(1, 1)] - 4.0).abs() < 1e-5);
        let (vcov, repaired) = information_to_vcov(&info).unwrap();
        assert!(!repaired);
        assert!((vcov[(0, 0)] - 0.5).abs() < 1e-5);
        // a non-PSD matrix gets floored and flagged
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        let (_, repaired) = information_to_vcov(&bad).unwrap();
        assert!(repaired);
    }
}
