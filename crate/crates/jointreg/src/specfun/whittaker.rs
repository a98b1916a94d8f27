//! Whittaker's W function through its integral representation
//!
//!   W_{λ,μ}(p) = p^{μ+1/2} e^{−p/2} / Γ(μ−λ+1/2)
//!                · ∫₀^∞ t^{μ−λ−1/2} (1+t)^{μ+λ−1/2} e^{−pt} dt,
//!
//! valid for p > 0 and μ − λ + 1/2 > 0. The integral is mapped onto (0, 1)
//! with t = u/(1−u) and evaluated by adaptive tanh-sinh quadrature, which
//! absorbs the algebraic endpoint singularity when μ − λ − 1/2 ∈ (−1, 0).

use super::gamma::log_gamma;
use super::quad::tanh_sinh;
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// W_{λ,μ}(p).
pub fn whittaker_w(lambda: f64, mu: f64, p: f64) -> Result<f64> {
    log_whittaker_w(lambda, mu, p).map(f64::exp)
}

/// ln W_{λ,μ}(p); the bivariate-gamma density works in log space to avoid
/// overflow in the prefactors.
pub fn log_whittaker_w(lambda: f64, mu: f64, p: f64) -> Result<f64> {
    check_domain(lambda, mu, p)?;
    let integral = whittaker_integral(lambda, mu, p, TOL)?;
    if integral <= 0.0 || !integral.is_finite() {
        return Err(Error::convergence(format!(
            "whittaker integral degenerate ({integral}) at lambda={lambda}, mu={mu}, p={p}"
        )));
    }
    Ok((mu + 0.5) * p.ln() - 0.5 * p - log_gamma(mu - lambda + 0.5)? + integral.ln())
}

fn check_domain(lambda: f64, mu: f64, p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() || !lambda.is_finite() || !mu.is_finite() {
        return Err(Error::domain(format!(
            "whittaker_w requires finite arguments and p > 0, got lambda={lambda}, mu={mu}, p={p}"
        )));
    }
    if mu - lambda + 0.5 <= 0.0 {
        return Err(Error::domain(format!(
            "whittaker_w requires mu - lambda + 1/2 > 0, got {}",
            mu - lambda + 0.5
        )));
    }
    Ok(())
}

/// ∫₀^∞ t^a (1+t)^b e^{−pt} dt with a = μ−λ−1/2, b = μ+λ−1/2, via the
/// substitution t = u/(1−u): the integrand becomes u^a (1−u)^{−a−b−2} e^{−pu/(1−u)}.
fn whittaker_integral(lambda: f64, mu: f64, p: f64, tol: f64) -> Result<f64> {
    let a = mu - lambda - 0.5;
    let b = mu + lambda - 0.5;
    tanh_sinh(
        |u| {
            let omu = 1.0 - u;
            let t_over = u / omu;
            let log_val = a * u.ln() - (a + b + 2.0) * omu.ln() - p * t_over;
            log_val.exp()
        },
        tol,
    )
}

/// Same quadrature at a fixed refinement level, used by the
/// self-convergence checks.
pub(crate) fn whittaker_w_at_level(lambda: f64, mu: f64, p: f64, level: u32) -> Result<f64> {
    check_domain(lambda, mu, p)?;
    let a = mu - lambda - 0.5;
    let b = mu + lambda - 0.5;
    let rule = super::quad::QuadratureRule::tanh_sinh_level(level);
    let integral = rule.integrate(|u| {
        let omu = 1.0 - u;
        (a * u.ln() - (a + b + 2.0) * omu.ln() - p * u / omu).exp()
    });
    Ok(((mu + 0.5) * p.ln() - 0.5 * p - log_gamma(mu - lambda + 0.5)? + integral.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_ur;

    /// When μ − λ = 1/2 the t^a factor drops and the integral has the closed
    /// form ∫ (1+t)^b e^{−pt} dt = e^p Γ(b+1, p) / p^{b+1}.
    fn reduced_oracle(mu: f64, p: f64) -> f64 {
        let lambda = mu - 0.5;
        let b = mu + lambda - 0.5;
        let integral =
            p.exp() * gamma_ur(b + 1.0, p) * log_gamma(b + 1.0).unwrap().exp() / p.powf(b + 1.0);
        ((mu + 0.5) * p.ln() - 0.5 * p).exp() * integral
    }

    #[test]
    fn reduced_integrand_closed_form() {
        for &(mu, p) in &[(1.0, 0.5), (2.3, 3.0), (0.8, 10.0), (4.0, 1.2)] {
            let lambda = mu - 0.5;
            let got = whittaker_w(lambda, mu, p).unwrap();
            let want = reduced_oracle(mu, p);
            assert!(
                ((got - want) / want).abs() < 1e-8,
                "mu={mu}, p={p}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn large_p_asymptotics() {
        // W_{λ,μ}(p) ~ e^{−p/2} p^λ (1 + O(1/p)); the first correction term
        // is (μ² − (λ−1/2)²)/p, so the leading term alone is only a 5%-level
        // oracle where that ratio is small.
        let p = 40.0;
        for &(lambda, mu) in &[(1.0, 0.6), (0.5, 0.3), (-0.5, 0.8)] {
            let c1: f64 = mu * mu - (lambda - 0.5) * (lambda - 0.5);
            assert!(c1.abs() / p < 0.03);
            let got = whittaker_w(lambda, mu, p).unwrap();
            let leading = (-0.5 * p).exp() * p.powf(lambda);
            assert!(
                ((got - leading) / leading).abs() < 0.05,
                "lambda={lambda}, mu={mu}: got {got}, leading {leading}"
            );
        }
    }

    #[test]
    fn self_convergence_under_refinement() {
        for &(lambda, mu, p) in &[(0.75, 1.6, 2.0), (1.2, 2.6, 0.4), (0.3, 1.1, 25.0)] {
            let coarse = whittaker_w_at_level(lambda, mu, p, 7).unwrap();
            let fine = whittaker_w_at_level(lambda, mu, p, 8).unwrap();
            assert!(
                ((fine - coarse) / fine).abs() < 1e-9,
                "lambda={lambda}, mu={mu}, p={p}: {coarse} vs {fine}"
            );
        }
    }

    #[test]
    fn integrable_singularity_small_shape() {
        // a = μ−λ−1/2 = −0.8 exercises the t^a endpoint singularity.
        let (lambda, mu, p) = (1.0, 0.7, 1.5);
        assert!(mu - lambda - 0.5 < 0.0);
        let got = whittaker_w(lambda, mu, p).unwrap();
        let refined = whittaker_w_at_level(lambda, mu, p, 9).unwrap();
        assert!(((got - refined) / refined).abs() < 1e-8);
    }

    #[test]
    fn domain_errors() {
        assert!(whittaker_w(2.0, 1.0, 1.0).is_err()); // mu − lambda + 1/2 < 0
        assert!(whittaker_w(0.5, 1.0, 0.0).is_err());
        assert!(whittaker_w(0.5, 1.0, -3.0).is_err());
        assert!(whittaker_w(f64::NAN, 1.0, 1.0).is_err());
    }
}
