//! Sample skewness.

use crate::error::{Error, Result};

/// Bias-adjusted sample skewness G₁ = g₁·√(n(n−1))/(n−2), where
/// g₁ = m₃/m₂^{3/2} is the method-of-moments estimator.
pub fn sample_skewness(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::domain(format!(
            "sample_skewness requires at least 3 observations, got {n}"
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("sample_skewness requires finite values"));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    if m2 <= 0.0 {
        return Err(Error::domain("sample_skewness undefined for constant input"));
    }
    let g1 = m3 / m2.powf(1.5);
    Ok(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
}
