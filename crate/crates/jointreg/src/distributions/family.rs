//! Response families in the GAMLSS mean/dispersion parameterization and the
//! link functions that connect them to linear predictors.
//!
//! Variance conventions: normal Var = σ², gamma Var = σ²μ², negative binomial
//! Var = μ + σμ².

use crate::error::{Error, Result};
use crate::specfun::{log_gamma, normal_cdf, normal_quantile};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma_lr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseFamily {
    Normal,
    Gamma,
    #[serde(rename = "negbin")]
    NegBin,
}

impl ResponseFamily {
    pub fn name(self) -> &'static str {
        match self {
            ResponseFamily::Normal => "normal",
            ResponseFamily::Gamma => "gamma",
            ResponseFamily::NegBin => "negbin",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" | "no" => Ok(ResponseFamily::Normal),
            "gamma" | "ga" => Ok(ResponseFamily::Gamma),
            "negbin" | "nb" | "nbi" | "negative_binomial" => Ok(ResponseFamily::NegBin),
            other => Err(Error::config(format!("unknown response family '{other}'"))),
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, ResponseFamily::NegBin)
    }

    /// The link the paper pairs with each family: identity for normal,
    /// log for gamma and negative binomial.
    pub fn default_link(self) -> LinkFunction {
        match self {
            ResponseFamily::Normal => LinkFunction::Identity,
            _ => LinkFunction::Log,
        }
    }

    /// Variance as a function of mean and dispersion.
    pub fn variance(self, mu: f64, sigma: f64) -> f64 {
        match self {
            ResponseFamily::Normal => sigma * sigma,
            ResponseFamily::Gamma => sigma * sigma * mu * mu,
            ResponseFamily::NegBin => mu + sigma * mu * mu,
        }
    }

    fn check_params(self, mu: f64, sigma: f64) -> Result<()> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::domain(format!(
                "{} family requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}",
                self.name()
            )));
        }
        if !matches!(self, ResponseFamily::Normal) && mu <= 0.0 {
            return Err(Error::domain(format!(
                "{} family requires mu > 0, got {mu}",
                self.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFunction {
    Identity,
    Log,
}

impl LinkFunction {
    pub fn name(self) -> &'static str {
        match self {
            LinkFunction::Identity => "identity",
            LinkFunction::Log => "log",
        }
    }

    /// η = g(μ).
    pub fn apply(self, mu: f64) -> Result<f64> {
        match self {
            LinkFunction::Identity => Ok(mu),
            LinkFunction::Log => {
                if mu <= 0.0 {
                    Err(Error::domain(format!("log link requires mu > 0, got {mu}")))
                } else {
                    Ok(mu.ln())
                }
            }
        }
    }

    /// μ = g⁻¹(η).
    pub fn inverse(self, eta: f64) -> f64 {
        match self {
            LinkFunction::Identity => eta,
            LinkFunction::Log => eta.exp(),
        }
    }

    /// dμ/dη at the linear predictor value.
    pub fn dmu_deta(self, eta: f64) -> f64 {
        match self {
            LinkFunction::Identity => 1.0,
            LinkFunction::Log => eta.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyStat {
    Pdf,
    LogPdf,
    Cdf,
    Quantile,
}

/// Evaluate density, log-density, CDF or quantile of a family at the GAMLSS
/// parameter pair (μ, σ). For `Quantile`, `y` is the probability level; the
/// negative binomial quantile is the smallest integer with CDF ≥ p.
pub fn family_eval(
    family: ResponseFamily,
    mu: f64,
    sigma: f64,
    y: f64,
    what: FamilyStat,
) -> Result<f64> {
    family.check_params(mu, sigma)?;
    match what {
        FamilyStat::Pdf => Ok(log_pdf(family, mu, sigma, y)?.exp()),
        FamilyStat::LogPdf => log_pdf(family, mu, sigma, y),
        FamilyStat::Cdf => cdf(family, mu, sigma, y),
        FamilyStat::Quantile => quantile(family, mu, sigma, y),
    }
}

/// log f(y; μ, σ). Points outside the support yield −∞ rather than an error
/// so likelihood code can treat them uniformly.
pub fn log_pdf(family: ResponseFamily, mu: f64, sigma: f64, y: f64) -> Result<f64> {
    family.check_params(mu, sigma)?;
    if !y.is_finite() {
        return Err(Error::domain(format!("log_pdf requires finite y, got {y}")));
    }
    Ok(match family {
        ResponseFamily::Normal => {
            let z = (y - mu) / sigma;
            -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        }
        ResponseFamily::Gamma => {
            if y <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            // shape a = 1/σ², scale s = μσ²
            let a = 1.0 / (sigma * sigma);
            let s = mu * sigma * sigma;
            -log_gamma(a)? - a * s.ln() + (a - 1.0) * y.ln() - y / s
        }
        ResponseFamily::NegBin => {
            let yi = check_count(y)?;
            let r = 1.0 / sigma;
            let yf = yi as f64;
            log_gamma(yf + r)? - log_gamma(r)? - log_gamma(yf + 1.0)?
                + r * (r / (r + mu)).ln()
                + yf * (mu / (r + mu)).ln()
        }
    })
}

pub fn cdf(family: ResponseFamily, mu: f64, sigma: f64, y: f64) -> Result<f64> {
    family.check_params(mu, sigma)?;
    Ok(match family {
        ResponseFamily::Normal => normal_cdf((y - mu) / sigma),
        ResponseFamily::Gamma => {
            if y <= 0.0 {
                0.0
            } else {
                let a = 1.0 / (sigma * sigma);
                let s = mu * sigma * sigma;
                gamma_lr(a, y / s)
            }
        }
        ResponseFamily::NegBin => {
            if y < 0.0 {
                0.0
            } else {
                let yi = check_count(y.floor())?;
                let r = 1.0 / sigma;
                // P(Y ≤ y) = I_p(r, y+1) with p = r/(r+μ)
                beta_reg(r, yi as f64 + 1.0, r / (r + mu))
            }
        }
    })
}

pub fn quantile(family: ResponseFamily, mu: f64, sigma: f64, p: f64) -> Result<f64> {
    family.check_params(mu, sigma)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "quantile requires p in (0,1), got {p}"
        )));
    }
    match family {
        ResponseFamily::Normal => Ok(mu + sigma * normal_quantile(p)?),
        ResponseFamily::Gamma => gamma_quantile(mu, sigma, p),
        ResponseFamily::NegBin => {
            // smallest integer with cdf ≥ p
            let mut hi = (mu + 10.0 * family.variance(mu, sigma).sqrt()).ceil().max(1.0);
            while cdf(family, mu, sigma, hi)? < p {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(Error::convergence("negbin quantile bracket overflow"));
                }
            }
            let (mut lo, mut hi) = (0.0_f64, hi);
            while hi - lo > 0.5 {
                let mid = ((lo + hi) / 2.0).floor();
                if cdf(family, mu, sigma, mid)? >= p {
                    hi = mid;
                } else {
                    lo = mid + 1.0;
                }
            }
            Ok(hi.max(lo))
        }
    }
}

/// Gamma quantile by bisection-safeguarded Newton on the regularized
/// incomplete gamma.
fn gamma_quantile(mu: f64, sigma: f64, p: f64) -> Result<f64> {
    let a = 1.0 / (sigma * sigma);
    let s = mu * sigma * sigma;
    // Wilson–Hilferty start in the standardized (scale 1) variable
    let z = normal_quantile(p)?;
    let wh = a * (1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt())).powi(3);
    let mut x = if wh.is_finite() && wh > 0.0 { wh } else { a };
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..100 {
        let f = gamma_lr(a, x) - p;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        // density of the standardized gamma at x
        let logd = (a - 1.0) * x.ln() - x - crate::specfun::log_gamma(a)?;
        let step = f / logd.exp();
        let mut next = x - step;
        if !(next > lo) || !(next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { x * 2.0 };
        }
        if (next - x).abs() <= 1e-14 * x.max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x * s)
}

fn check_count(y: f64) -> Result<u64> {
    if y < 0.0 || !y.is_finite() || (y - y.round()).abs() > 1e-8 {
        return Err(Error::domain(format!(
            "negbin support is the nonnegative integers, got {y}"
        )));
    }
    Ok(y.round() as u64)
}

/// ∂ log f / ∂η at a linear predictor η (with the given link) — the piece of
/// the score the fitters share across models.
pub fn score_eta(
    family: ResponseFamily,
    link: LinkFunction,
    eta: f64,
    sigma: f64,
    y: f64,
) -> f64 {
    let mu = link.inverse(eta);
    let d = link.dmu_deta(eta);
    match family {
        ResponseFamily::Normal => (y - mu) / (sigma * sigma) * d,
        ResponseFamily::Gamma => {
            let a = 1.0 / (sigma * sigma);
            // ∂logf/∂μ = a(y − μ)/μ²
            a * (y - mu) / (mu * mu) * d
        }
        ResponseFamily::NegBin => {
            let r = 1.0 / sigma;
            (y / mu - (y + r) / (r + mu)) * d
        }
    }
}

/// ∂ log f / ∂μ.
pub fn score_mu(family: ResponseFamily, mu: f64, sigma: f64, y: f64) -> f64 {
    match family {
        ResponseFamily::Normal => (y - mu) / (sigma * sigma),
        ResponseFamily::Gamma => (y - mu) / (mu * mu * sigma * sigma),
        ResponseFamily::NegBin => {
            let r = 1.0 / sigma;
            y / mu - (y + r) / (r + mu)
        }
    }
}

/// ∂² log f / ∂μ².
pub fn dscore_dmu(family: ResponseFamily, mu: f64, sigma: f64, y: f64) -> f64 {
    match family {
        ResponseFamily::Normal => -1.0 / (sigma * sigma),
        ResponseFamily::Gamma => (1.0 / (mu * mu) - 2.0 * y / (mu * mu * mu)) / (sigma * sigma),
        ResponseFamily::NegBin => {
            let r = 1.0 / sigma;
            -y / (mu * mu) + (y + r) / ((r + mu) * (r + mu))
        }
    }
}

/// ∂² log f / ∂η² through the link.
pub fn curvature_eta(
    family: ResponseFamily,
    link: LinkFunction,
    eta: f64,
    sigma: f64,
    y: f64,
) -> f64 {
    let mu = link.inverse(eta);
    let d = link.dmu_deta(eta);
    let dd = match link {
        LinkFunction::Identity => 0.0,
        LinkFunction::Log => mu,
    };
    dscore_dmu(family, mu, sigma, y) * d * d + score_mu(family, mu, sigma, y) * dd
}

/// ∂ log f / ∂ log σ.
pub fn score_log_sigma(family: ResponseFamily, mu: f64, sigma: f64, y: f64) -> Result<f64> {
    Ok(match family {
        ResponseFamily::Normal => {
            let z = (y - mu) / sigma;
            z * z - 1.0
        }
        ResponseFamily::Gamma => {
            let a = 1.0 / (sigma * sigma);
            // da/dlogσ = −2a
            let dlogf_da = (a / mu).ln() + 1.0 - crate::specfun::digamma(a)? + y.ln() - y / mu;
            -2.0 * a * dlogf_da
        }
        ResponseFamily::NegBin => {
            let r = 1.0 / sigma;
            let dlogf_dr = crate::specfun::digamma(y + r)? - crate::specfun::digamma(r)?
                + (r / (r + mu)).ln()
                + 1.0
                - (r + y) / (r + mu);
            -r * dlogf_dr
        }
    })
}
