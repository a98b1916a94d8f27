//! Model-selection criteria with the random-effect EDF convention.
//!
//! Fixed-parameter models count their parameters directly (GLM 3, GJRM 5, or
//! 6 with a Student-t copula). The GLMM's effective degrees of freedom add
//! the ridge-type shrinkage trace Σᵢ wᵢ/(wᵢ + 1/θ̂²) of the random intercept
//! to its fixed-parameter count, a conditional-AIC-style penalty.

use crate::error::{Error, Result};
use crate::estimators::FitResult;

#[derive(Debug, Clone)]
pub struct SelectionRow {
    pub model_tag: String,
    pub loglik: Option<f64>,
    pub edf: f64,
    pub aic: Option<f64>,
    pub gaic_k: Option<f64>,
    pub bic: Option<f64>,
    pub n_obs: usize,
}

/// Criteria for one fit; `n_obs` is the total observation count (2n for
/// two-timepoint data). GEE rows carry their EDF but no likelihood-based
/// criteria.
pub fn criteria(fit: &FitResult, k: f64, n_obs: usize) -> Result<SelectionRow> {
    if fit.loglik.is_some() && !fit.edf.is_finite() {
        return Err(Error::domain(
            "fit reports a log-likelihood but no usable EDF",
        ));
    }
    let edf = fit.edf;
    let make = |ll: f64, penalty: f64| -2.0 * ll + penalty * edf;
    Ok(SelectionRow {
        model_tag: fit.model.clone(),
        loglik: fit.loglik,
        edf,
        aic: fit.loglik.map(|ll| make(ll, 2.0)),
        gaic_k: fit.loglik.map(|ll| make(ll, k)),
        bic: fit.loglik.map(|ll| make(ll, (n_obs as f64).ln())),
        n_obs,
    })
}

/// Ridge-trace EDF of a GLMM fit: fixed-parameter count plus
/// Σᵢ wᵢ/(wᵢ + 1/θ̂²), where wᵢ is subject i's conditional information about
/// its intercept at the mode. Returns the fixed count alone on the θ̂ → 0
/// boundary.
pub fn glmm_edf(fit: &FitResult) -> Result<f64> {
    if fit.model != "glmm" {
        return Err(Error::domain(format!(
            "glmm_edf applies to GLMM fits, got '{}'",
            fit.model
        )));
    }
    let theta = fit
        .get("dependence")
        .ok_or_else(|| Error::domain("GLMM fit carries no random-effect SD"))?;
    let fixed = (fit.names.len() - 1) as f64;
    if fit.diagnostics.re_boundary || theta <= 0.0 {
        return Ok(fixed);
    }
    if fit.diagnostics.subject_info.is_empty() {
        return Err(Error::domain("GLMM fit carries no subject information"));
    }
    let inv_th2 = 1.0 / (theta * theta);
    Ok(fixed
        + fit
            .diagnostics
            .subject_info
            .iter()
            .map(|&w| w / (w + inv_th2))
            .sum::<f64>())
}
