//! Univariate and bivariate Student t distribution functions.

use crate::error::{Error, Result};
use crate::specfun::{log_gamma, tanh_sinh};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn t_cdf(x: f64, df: f64) -> f64 {
    // statrs' incomplete beta rejects arguments perturbed outside [0,1] by
    // rounding at extreme |x|; the tails are 0/1 to machine precision there.
    if x < -1e9 {
        return 0.0;
    }
    if x > 1e9 {
        return 1.0;
    }
    let d = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    d.cdf(x)
}

pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("t_quantile requires p in (0,1), got {p}")));
    }
    let d = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    Ok(d.inverse_cdf(p))
}

pub fn t_log_pdf(x: f64, df: f64) -> f64 {
    log_gamma(0.5 * (df + 1.0)).unwrap()
        - log_gamma(0.5 * df).unwrap()
        - 0.5 * (df * std::f64::consts::PI).ln()
        - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()
}

/// P(X ≤ x, Y ≤ y) for a standard bivariate t with correlation ρ and df ν,
/// via the conditional decomposition
///   T₂(x,y) = ∫_{−∞}^x f_ν(s) · T_{ν+1}( (y−ρs)/√(1−ρ²) · √((ν+1)/(ν+s²)) ) ds.
pub fn bvt_cdf(x: f64, y: f64, rho: f64, df: f64) -> Result<f64> {
    if rho.abs() >= 1.0 || df <= 0.0 {
        return Err(Error::domain(format!(
            "bvt_cdf requires |rho| < 1 and df > 0, got rho={rho}, df={df}"
        )));
    }
    let denom = (1.0 - rho * rho).sqrt();
    let value = tanh_sinh(
        |q| {
            // s runs over (−∞, x] as q runs over (0, 1]
            let s = x - (1.0 - q) / q;
            if s < -1e8 {
                return 0.0; // t density underflows long before this
            }
            let scale = ((df + 1.0) / (df + s * s)).sqrt();
            let inner = t_cdf((y - rho * s) / denom * scale, df + 1.0);
            t_log_pdf(s, df).exp() * inner / (q * q)
        },
        1e-10,
    )?;
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::normal_cdf;

    #[test]
    fn t_quantile_inverts_cdf() {
        for &df in &[3.0, 8.0, 30.0] {
            for &p in &[0.01, 0.2, 0.5, 0.9, 0.999] {
                let q = t_quantile(p, df).unwrap();
                assert!((t_cdf(q, df) - p).abs() < 1e-9, "df={df} p={p}");
            }
        }
    }

    #[test]
    fn t_approaches_normal_for_large_df() {
        for &x in &[-2.0, 0.0, 1.5] {
            assert!((t_cdf(x, 1e6) - normal_cdf(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn bvt_center_matches_closed_form() {
        // T₂(0,0;ρ) = 1/4 + asin(ρ)/(2π) for every df
        for &df in &[3.0, 10.0] {
            for &rho in &[-0.5_f64, 0.0, 0.6, 0.9] {
                let want = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
                let got = bvt_cdf(0.0, 0.0, rho, df).unwrap();
                assert!((got - want).abs() < 1e-8, "df={df} rho={rho}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bvt_margin_limit() {
        // y → ∞ leaves the univariate t cdf of x
        let got = bvt_cdf(0.7, 60.0, 0.5, 5.0).unwrap();
        assert!((got - t_cdf(0.7, 5.0)).abs() < 1e-8);
    }
}
