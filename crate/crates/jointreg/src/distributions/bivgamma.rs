//! Joint density of the Beta-mixed bivariate gamma.
//!
//! With α = 1/σ², β = θ and rates r_t = α/μ_t, conditioning on the Beta
//! mixing variable and integrating it out gives
//!
//!   f(y₁, y₂) = (r₁r₂)^{α+β} (y₁y₂)^{α+β−1} / [Γ(α+β) Γ(α)]
//!               · s^{(α−1)/2 − (α+β)} e^{−s/2} · W_{(α+1)/2, α/2+β}(s),
//!
//! where s = r₁y₁ + r₂y₂ and W is Whittaker's function. Everything is
//! assembled in log space; the prefactors overflow long before the density
//! itself does.

use super::scenario::TrueScenario;
use crate::error::{Error, Result};
use crate::specfun::{log_gamma, log_whittaker_w};

pub fn biv_gamma_pdf(y1: f64, y2: f64, scenario: &TrueScenario) -> Result<f64> {
    biv_gamma_log_pdf(y1, y2, scenario).map(f64::exp)
}

pub fn biv_gamma_log_pdf(y1: f64, y2: f64, scenario: &TrueScenario) -> Result<f64> {
    scenario.validate()?;
    let TrueScenario::BivGamma { mu1, mu2, sigma, theta } = *scenario else {
        return Err(Error::domain("biv_gamma_pdf requires a biv_gamma scenario"));
    };
    if y1 <= 0.0 || y2 <= 0.0 || !y1.is_finite() || !y2.is_finite() {
        return Err(Error::domain(format!(
            "biv_gamma_pdf requires y1, y2 > 0, got ({y1}, {y2})"
        )));
    }
    let alpha = 1.0 / (sigma * sigma);
    let beta = theta;
    let r1 = alpha / mu1;
    let r2 = alpha / mu2;
    let s = r1 * y1 + r2 * y2;
    let ab = alpha + beta;
    let lambda_w = 0.5 * (alpha + 1.0);
    let mu_w = 0.5 * alpha + beta;
    Ok(ab * (r1.ln() + r2.ln()) + (ab - 1.0) * (y1.ln() + y2.ln())
        - log_gamma(ab)?
        - log_gamma(alpha)?
        + (0.5 * (alpha - 1.0) - ab) * s.ln()
        - 0.5 * s
        + log_whittaker_w(lambda_w, mu_w, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{family_eval, FamilyStat, ResponseFamily};
    use crate::specfun::QuadratureRule;

    fn ga_pdf(mu: f64, sigma: f64, y: f64) -> f64 {
        family_eval(ResponseFamily::Gamma, mu, sigma, y, FamilyStat::Pdf).unwrap()
    }

    fn ga_quantile(mu: f64, sigma: f64, p: f64) -> f64 {
        family_eval(ResponseFamily::Gamma, mu, sigma, p, FamilyStat::Quantile).unwrap()
    }

    /// 2-D quadrature of the density in marginal quantile space: the change
    /// of variables (p₁, p₂) = (F₁(y₁), F₂(y₂)) turns the mass integral into
    /// ∫∫ f/(g₁g₂) over the unit square.
    fn total_mass(s: &TrueScenario, order: usize) -> f64 {
        let TrueScenario::BivGamma { mu1, mu2, sigma, .. } = *s else {
            unreachable!()
        };
        let rule = QuadratureRule::gauss_legendre_on(order, 0.0, 1.0).unwrap();
        let mut total = 0.0;
        for (&p1, &w1) in rule.nodes.iter().zip(&rule.weights) {
            let y1 = ga_quantile(mu1, sigma, p1);
            let g1 = ga_pdf(mu1, sigma, y1);
            for (&p2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                let y2 = ga_quantile(mu2, sigma, p2);
                let g2 = ga_pdf(mu2, sigma, y2);
                total += w1 * w2 * biv_gamma_pdf(y1, y2, s).unwrap() / (g1 * g2);
            }
        }
        total
    }

    #[test]
    fn density_integrates_to_one() {
        let cases = [
            TrueScenario::BivGamma { mu1: 2.0, mu2: 2.4, sigma: 1.0, theta: 1.0 },
            TrueScenario::BivGamma { mu1: 5.0, mu2: 6.0, sigma: 0.6, theta: 2.0 },
            TrueScenario::BivGamma { mu1: 10.0, mu2: 12.0, sigma: 1.2, theta: 0.4 },
        ];
        for s in &cases {
            let mass = total_mass(s, 64);
            assert!((mass - 1.0).abs() < 1e-3, "{s:?}: mass={mass}");
        }
    }

    #[test]
    fn marginal_integration_recovers_ga_density() {
        let s = TrueScenario::BivGamma { mu1: 3.0, mu2: 4.0, sigma: 0.8, theta: 1.5 };
        let TrueScenario::BivGamma { mu1, mu2, sigma, .. } = s else {
            unreachable!()
        };
        let rule = QuadratureRule::gauss_legendre_on(128, 0.0, 1.0).unwrap();
        for &y1 in &[1.0, 2.5, 4.0, 7.0] {
            let mut integral = 0.0;
            for (&p2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                let y2 = ga_quantile(mu2, sigma, p2);
                let g2 = ga_pdf(mu2, sigma, y2);
                integral += w2 * biv_gamma_pdf(y1, y2, &s).unwrap() / g2;
            }
            let want = ga_pdf(mu1, sigma, y1);
            assert!(
                (integral - want).abs() < 1e-4,
                "y1={y1}: {integral} vs {want}"
            );
        }
    }

    #[test]
    fn symmetric_when_means_equal() {
        let s = TrueScenario::BivGamma { mu1: 3.0, mu2: 3.0, sigma: 0.9, theta: 0.8 };
        for &(a, b) in &[(1.0, 2.0), (0.4, 5.0), (2.2, 2.9)] {
            let ab = biv_gamma_pdf(a, b, &s).unwrap();
            let ba = biv_gamma_pdf(b, a, &s).unwrap();
            assert!((ab - ba).abs() <= 1e-12 * ab.max(1e-300), "{ab} vs {ba}");
        }
    }

    #[test]
    fn rejects_nonpositive_support() {
        let s = TrueScenario::BivGamma { mu1: 1.0, mu2: 1.0, sigma: 1.0, theta: 1.0 };
        assert!(biv_gamma_pdf(0.0, 1.0, &s).is_err());
        assert!(biv_gamma_pdf(1.0, -2.0, &s).is_err());
    }
}
