//! The four model classes fitted to a [`LongitudinalSample`], all returning a
//! uniform [`FitResult`].
//!
//! [`LongitudinalSample`]: crate::distributions::LongitudinalSample

mod gee;
mod glm;
mod glmm;
mod gjrm;
pub(crate) mod optim;
mod time_effect;

pub use gee::fit_gee;
pub use glm::fit_glm;
pub use glmm::{fit_glmm, GlmmOptions};
pub use gjrm::{fit_gjrm, fit_gjrm_with, GjrmOptions};
pub use time_effect::extract_time_effect;

use crate::distributions::LinkFunction;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Linear-predictor layout: `Marginal` carries one coefficient per time
/// point, `TimeEffect` an intercept plus the time-2 increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    Marginal,
    TimeEffect,
}

impl Parameterization {
    pub fn name(self) -> &'static str {
        match self {
            Parameterization::Marginal => "marginal",
            Parameterization::TimeEffect => "time_effect",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "marginal" => Ok(Parameterization::Marginal),
            "time_effect" | "timeeffect" => Ok(Parameterization::TimeEffect),
            other => Err(Error::config(format!("unknown parameterization '{other}'"))),
        }
    }

    /// Linear predictors (η₁, η₂) from the two mean coefficients.
    pub fn predictors(self, b1: f64, b2: f64) -> (f64, f64) {
        match self {
            Parameterization::Marginal => (b1, b2),
            Parameterization::TimeEffect => (b1, b1 + b2),
        }
    }

    pub fn coef_names(self) -> (&'static str, &'static str) {
        match self {
            Parameterization::Marginal => ("beta1", "beta2"),
            Parameterization::TimeEffect => ("beta1", "beta_t"),
        }
    }
}

/// Extra per-fit diagnostics that don't fit the estimate/vcov scheme.
#[derive(Debug, Clone, Default)]
pub struct FitDiagnostics {
    /// PIT values clipped to the copula's admissible interior (GJRM).
    pub clipped: usize,
    /// The observed information needed an eigenvalue floor.
    pub hessian_repaired: bool,
    /// The random-effect SD collapsed to its lower boundary (GLMM).
    pub re_boundary: bool,
    /// Conditional information of each subject about its intercept at the
    /// mode (GLMM), feeding the ridge-trace EDF.
    pub subject_info: Vec<f64>,
}

/// Uniform fit summary across GLM, GEE, GLMM and GJRM.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: String,
    pub parameterization: Parameterization,
    pub link: LinkFunction,
    /// Names of the jointly estimated parameters, in `vcov` order.
    pub names: Vec<String>,
    /// Estimates on the reporting scale (dispersion entries are logs, the
    /// dependence entry is natural).
    pub estimates: Vec<f64>,
    /// Covariance of the estimates, same order as `names`.
    pub vcov: DMatrix<f64>,
    /// Auxiliary quantities estimated outside the joint covariance
    /// (for the GEE: dispersion and working correlation).
    pub aux: Vec<(String, f64)>,
    pub loglik: Option<f64>,
    pub edf: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wall_ms: f64,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.estimates[i])
            .or_else(|| self.aux.iter().find(|(n, _)| n == name).map(|(_, v)| *v))
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.vcov[(i, i)].max(0.0).sqrt())
    }

    /// Estimated marginal means on the response scale.
    pub fn mu_hat(&self) -> Result<(f64, f64)> {
        let (n1, n2) = self.parameterization.coef_names();
        let b1 = self
            .get(n1)
            .ok_or_else(|| Error::domain(format!("missing {n1}")))?;
        let b2 = self
            .get(n2)
            .ok_or_else(|| Error::domain(format!("missing {n2}")))?;
        let (e1, e2) = self.parameterization.predictors(b1, b2);
        Ok((self.link.inverse(e1), self.link.inverse(e2)))
    }

    /// Symmetry and PSD sanity of the covariance, used by tests.
    pub fn vcov_is_valid(&self, tol: f64) -> bool {
        let v = &self.vcov;
        if v.nrows() != v.ncols() || v.nrows() != self.names.len() {
            return false;
        }
        for i in 0..v.nrows() {
            for j in 0..v.ncols() {
                if (v[(i, j)] - v[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(v.clone());
        eig.eigenvalues.iter().all(|&l| l > -tol)
    }
}

/// Elapsed milliseconds of a closure, attached to every fit.
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let out = f();
    let ms = start.elapsed().as_secs_f64() * 1e3;
    (out, ms.max(1e-3))
}
