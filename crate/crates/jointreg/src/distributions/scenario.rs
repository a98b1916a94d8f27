//! Scenario descriptions: a generator identity plus its true parameters and
//! the derived truths (tau, skewness, asymptotic standard errors).

use super::bivgamma::biv_gamma_log_pdf;
use super::family::ResponseFamily;
use super::generators::sample_scenario;
use crate::error::{Error, Result};
use crate::specfun::{kendall_tau, log_gamma};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// A bivariate data-generating process with its raw parameters.
///
/// GAMLSS-scale derived quantities (means, dispersions, correlation, skew)
/// come from the accessor methods so that every consumer shares one set of
/// conversions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum TrueScenario {
    BivNormal {
        mu1: f64,
        mu2: f64,
        sigma1: f64,
        sigma2: f64,
        rho: f64,
    },
    /// Compound Poisson: λ ~ Gamma(shape k, scale θ_mix), Y_t | λ ~ Poisson(λ t_t).
    BivNegBin {
        t1: f64,
        t2: f64,
        theta_mix: f64,
        k: f64,
    },
    /// Beta-mixed bivariate gamma: W ~ Beta(α, θ) multiplies two independent
    /// Gamma(α+θ) variates scaled to the target means, with α = 1/σ².
    BivGamma {
        mu1: f64,
        mu2: f64,
        sigma: f64,
        theta: f64,
    },
}

impl TrueScenario {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TrueScenario::BivNormal {
                sigma1,
                sigma2,
                rho,
                mu1,
                mu2,
            } => {
                sigma1 > 0.0
                    && sigma2 > 0.0
                    && rho > -1.0
                    && rho < 1.0
                    && mu1.is_finite()
                    && mu2.is_finite()
            }
            TrueScenario::BivNegBin { t1, t2, theta_mix, k } => {
                t1 > 0.0 && t2 > 0.0 && theta_mix > 0.0 && k > 0.0
            }
            TrueScenario::BivGamma { mu1, mu2, sigma, theta } => {
                mu1 > 0.0 && mu2 > 0.0 && sigma > 0.0 && theta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid scenario parameters: {self:?}")))
        }
    }

    pub fn generator_name(&self) -> &'static str {
        match self {
            TrueScenario::BivNormal { .. } => "biv_normal",
            TrueScenario::BivNegBin { .. } => "biv_negbin",
            TrueScenario::BivGamma { .. } => "biv_gamma",
        }
    }

    pub fn family(&self) -> ResponseFamily {
        match self {
            TrueScenario::BivNormal { .. } => ResponseFamily::Normal,
            TrueScenario::BivNegBin { .. } => ResponseFamily::NegBin,
            TrueScenario::BivGamma { .. } => ResponseFamily::Gamma,
        }
    }

    /// Marginal mean at time t (1 or 2).
    pub fn mu(&self, t: usize) -> f64 {
        match *self {
            TrueScenario::BivNormal { mu1, mu2, .. } => pick(t, mu1, mu2),
            TrueScenario::BivNegBin { t1, t2, theta_mix, k } => {
                pick(t, t1, t2) * k * theta_mix
            }
            TrueScenario::BivGamma { mu1, mu2, .. } => pick(t, mu1, mu2),
        }
    }

    /// Marginal GAMLSS dispersion at time t.
    pub fn sigma(&self, t: usize) -> f64 {
        match *self {
            TrueScenario::BivNormal { sigma1, sigma2, .. } => pick(t, sigma1, sigma2),
            TrueScenario::BivNegBin { k, .. } => 1.0 / k,
            TrueScenario::BivGamma { sigma, .. } => sigma,
        }
    }

    /// Pearson correlation of (Y1, Y2).
    pub fn pearson_rho(&self) -> f64 {
        match *self {
            TrueScenario::BivNormal { rho, .. } => rho,
            TrueScenario::BivNegBin { .. } => {
                let (m1, m2, s) = (self.mu(1), self.mu(2), self.sigma(1));
                s * m1 * m2 / ((m1 + s * m1 * m1) * (m2 + s * m2 * m2)).sqrt()
            }
            TrueScenario::BivGamma { sigma, theta, .. } => {
                sigma * theta.sqrt() / (1.0 + sigma * sigma + sigma * sigma * theta)
            }
        }
    }

    /// Population Kendall's tau where a closed form exists (bivariate normal).
    pub fn kendall_tau_closed(&self) -> Option<f64> {
        match *self {
            TrueScenario::BivNormal { rho, .. } => {
                Some(2.0 / std::f64::consts::PI * rho.asin())
            }
            _ => None,
        }
    }

    /// Population skewness of the margin at time t.
    pub fn skew(&self, t: usize) -> f64 {
        match *self {
            TrueScenario::BivNormal { .. } => 0.0,
            TrueScenario::BivNegBin { .. } => {
                let (mu, s) = (self.mu(t), self.sigma(t));
                (1.0 + 2.0 * s * mu) / (mu * (1.0 + s * mu)).sqrt()
            }
            TrueScenario::BivGamma { sigma, .. } => 2.0 * sigma,
        }
    }
}

fn pick(t: usize, v1: f64, v2: f64) -> f64 {
    match t {
        1 => v1,
        2 => v2,
        _ => panic!("time index must be 1 or 2, got {t}"),
    }
}

/// Joint pmf of the compound-Poisson bivariate negative binomial, expressed
/// in GAMLSS terms: with c_t = σμ_t and k = 1/σ,
///
///   P(y1, y2) = c1^y1 c2^y2 Γ(k + y1 + y2)
///               / [y1! y2! Γ(k) (1 + c1 + c2)^{k+y1+y2}].
pub fn biv_negbin_log_pmf(y1: u64, y2: u64, mu1: f64, mu2: f64, sigma: f64) -> Result<f64> {
    if mu1 <= 0.0 || mu2 <= 0.0 || sigma <= 0.0 {
        return Err(Error::domain("biv_negbin_log_pmf requires positive parameters"));
    }
    let k = 1.0 / sigma;
    let (c1, c2) = (sigma * mu1, sigma * mu2);
    let (y1f, y2f) = (y1 as f64, y2 as f64);
    Ok(y1f * c1.ln() + y2f * c2.ln() + log_gamma(k + y1f + y2f)?
        - log_gamma(y1f + 1.0)?
        - log_gamma(y2f + 1.0)?
        - log_gamma(k)?
        - (k + y1f + y2f) * (1.0 + c1 + c2).ln())
}

/// Derived truths for a scenario: population tau and skewness plus the true
/// asymptotic standard errors of β̂₁, β̂₂ and β̂_t = β̂₂ − β̂₁ at sample size
/// `n`, from the inverse expected information of the correctly specified
/// joint likelihood.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioTruth {
    pub tau: f64,
    pub skew1: f64,
    pub skew2: f64,
    pub se_beta1: f64,
    pub se_beta2: f64,
    pub se_beta_t: f64,
}

/// Monte Carlo sample cap for the numeric expected-information step; score
/// outer products converge much faster than tau does, and the bivariate-gamma
/// density is expensive.
const INFO_MC_CAP: usize = 20_000;

pub fn scenario_truth(
    scenario: &TrueScenario,
    n: usize,
    mc_n: usize,
    seed: u64,
) -> Result<ScenarioTruth> {
    scenario.validate()?;
    if mc_n < 10_000 {
        return Err(Error::domain(format!(
            "scenario_truth needs mc_n >= 10000 for stable estimates, got {mc_n}"
        )));
    }
    let tau = match scenario.kendall_tau_closed() {
        Some(t) => t,
        None => {
            let d = sample_scenario(scenario, mc_n, seed ^ 0x5eed_7a0)?;
            kendall_tau(&d.pairs())?
        }
    };
    let nf = n as f64;
    let (se1, se2, set) = match *scenario {
        TrueScenario::BivNormal {
            sigma1,
            sigma2,
            rho,
            ..
        } => {
            // identity link: vcov(μ̂) = Σ / n
            let vt = (sigma1 * sigma1 + sigma2 * sigma2 - 2.0 * rho * sigma1 * sigma2) / nf;
            (sigma1 / nf.sqrt(), sigma2 / nf.sqrt(), vt.sqrt())
        }
        _ => {
            let info = expected_information(scenario, mc_n.min(INFO_MC_CAP), seed ^ 0x1f0)?;
            let inv = info
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::convergence("expected information not invertible"))?;
            let v11 = inv[(0, 0)] / nf;
            let v22 = inv[(1, 1)] / nf;
            let v12 = inv[(0, 1)] / nf;
            (v11.sqrt(), v22.sqrt(), (v11 + v22 - 2.0 * v12).sqrt())
        }
    };
    Ok(ScenarioTruth {
        tau,
        skew1: scenario.skew(1),
        skew2: scenario.skew(2),
        se_beta1: se1,
        se_beta2: se2,
        se_beta_t: set,
    })
}

/// Per-pair expected information E[s sᵀ] of the true joint likelihood in the
/// parameterization (β₁, β₂, log σ[, log θ]) with β_t = log μ_t, estimated by
/// Monte Carlo with central-difference scores.
fn expected_information(scenario: &TrueScenario, mc: usize, seed: u64) -> Result<DMatrix<f64>> {
    let d = sample_scenario(scenario, mc, seed)?;
    let (dim, logp): (usize, Box<dyn Fn(&[f64], f64, f64) -> Result<f64>>) = match *scenario {
        TrueScenario::BivNegBin { .. } => (
            3,
            Box::new(move |psi: &[f64], y1: f64, y2: f64| {
                biv_negbin_log_pmf(
                    y1 as u64,
                    y2 as u64,
                    psi[0].exp(),
                    psi[1].exp(),
                    psi[2].exp(),
                )
            }),
        ),
        TrueScenario::BivGamma { .. } => (
            4,
            Box::new(move |psi: &[f64], y1: f64, y2: f64| {
                let s = TrueScenario::BivGamma {
                    mu1: psi[0].exp(),
                    mu2: psi[1].exp(),
                    sigma: psi[2].exp(),
                    theta: psi[3].exp(),
                };
                biv_gamma_log_pdf(y1, y2, &s)
            }),
        ),
        TrueScenario::BivNormal { .. } => unreachable!("normal handled in closed form"),
    };

    let mut psi0 = vec![
        scenario.mu(1).ln(),
        scenario.mu(2).ln(),
        scenario.sigma(1).ln(),
    ];
    if let TrueScenario::BivGamma { theta, .. } = scenario {
        psi0.push(theta.ln());
    }

    let h = 1e-5;
    let mut info = DMatrix::zeros(dim, dim);
    let mut score = vec![0.0; dim];
    for (&y1, &y2) in d.y1().iter().zip(d.y2()) {
        for j in 0..dim {
            let mut hi = psi0.clone();
            hi[j] += h;
            let mut lo = psi0.clone();
            lo[j] -= h;
            score[j] = (logp(&hi, y1, y2)? - logp(&lo, y1, y2)?) / (2.0 * h);
        }
        for a in 0..dim {
            for b in 0..dim {
                info[(a, b)] += score[a] * score[b];
            }
        }
    }
    Ok(info / mc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_truths() {
        let s = TrueScenario::BivNormal {
            mu1: 1.0,
            mu2: 2.0,
            sigma1: 1.5,
            sigma2: 0.5,
            rho: 0.5,
        };
        let t = scenario_truth(&s, 1000, 10_000, 1).unwrap();
        assert!((t.tau - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.skew1, 0.0);
        assert!((t.se_beta1 - 1.5 / 1000.0_f64.sqrt()).abs() < 1e-12);
        assert!((t.se_beta2 - 0.5 / 1000.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gamma_skew_grows_with_sigma() {
        let s = TrueScenario::BivGamma {
            mu1: 2.0,
            mu2: 2.4,
            sigma: 2.0_f64.sqrt(),
            theta: 2.0,
        };
        assert!(s.skew(1) > 2.0);
        let low = TrueScenario::BivGamma {
            mu1: 2.0,
            mu2: 2.4,
            sigma: 0.5,
            theta: 2.0,
        };
        assert!(low.skew(1) < s.skew(1));
    }

    #[test]
    fn negbin_joint_pmf_normalizes_and_matches_margins() {
        let (mu1, mu2, sigma) = (1.5, 2.5, 0.8);
        let mut total = 0.0;
        let mut margin0 = 0.0;
        for y1 in 0..120u64 {
            for y2 in 0..120u64 {
                let p = biv_negbin_log_pmf(y1, y2, mu1, mu2, sigma).unwrap().exp();
                total += p;
                if y1 == 3 {
                    margin0 += p;
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-8, "total={total}");
        let want = crate::distributions::family_eval(
            ResponseFamily::NegBin,
            mu1,
            sigma,
            3.0,
            crate::distributions::FamilyStat::Pdf,
        )
        .unwrap();
        assert!((margin0 - want).abs() < 1e-8, "{margin0} vs {want}");
    }

    #[test]
    fn invalid_scenarios_rejected() {
        assert!(TrueScenario::BivNormal {
            mu1: 0.0,
            mu2: 0.0,
            sigma1: 1.0,
            sigma2: 1.0,
            rho: 1.0
        }
        .validate()
        .is_err());
        assert!(TrueScenario::BivGamma {
            mu1: 1.0,
            mu2: 1.0,
            sigma: -0.5,
            theta: 1.0
        }
        .validate()
        .is_err());
    }
}
