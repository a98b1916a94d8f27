//! Delta-method extraction of the time effect from a marginal fit.

use super::{FitResult, Parameterization};
use crate::error::{Error, Result};

/// β_t = β₂ − β₁ with SE² = Var(β₂) + Var(β₁) − 2 Cov(β₁, β₂), taken from a
/// marginal-parameterization fit's covariance block.
pub fn extract_time_effect(fit: &FitResult) -> Result<(f64, f64)> {
    if fit.parameterization != Parameterization::Marginal {
        return Err(Error::domain(
            "extract_time_effect needs a marginal-parameterization fit",
        ));
    }
    let i1 = fit
        .names
        .iter()
        .position(|n| n == "beta1")
        .ok_or_else(|| Error::domain("fit carries no beta1 in its covariance block"))?;
    let i2 = fit
        .names
        .iter()
        .position(|n| n == "beta2")
        .ok_or_else(|| Error::domain("fit carries no beta2 in its covariance block"))?;
    let beta_t = fit.estimates[i2] - fit.estimates[i1];
    let var = fit.vcov[(i2, i2)] + fit.vcov[(i1, i1)] - 2.0 * fit.vcov[(i1, i2)];
    Ok((beta_t, var.max(0.0).sqrt()))
}
