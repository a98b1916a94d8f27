//! Seeded samplers for the three bivariate scenarios.
//!
//! All samplers draw from a counter-based ChaCha stream keyed by the caller's
//! 64-bit seed, so identical (scenario, n, seed) triples give bit-identical
//! samples regardless of what else is running.

use super::sample::LongitudinalSample;
use super::scenario::TrueScenario;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Poisson, StandardNormal};

pub fn sample_scenario(
    scenario: &TrueScenario,
    n: usize,
    seed: u64,
) -> Result<LongitudinalSample> {
    match scenario {
        TrueScenario::BivNormal { .. } => sample_biv_normal(scenario, n, seed),
        TrueScenario::BivNegBin { .. } => sample_biv_negbin(scenario, n, seed),
        TrueScenario::BivGamma { .. } => sample_biv_gamma(scenario, n, seed),
    }
}

pub fn sample_biv_normal(
    scenario: &TrueScenario,
    n: usize,
    seed: u64,
) -> Result<LongitudinalSample> {
    scenario.validate()?;
    let TrueScenario::BivNormal {
        mu1,
        mu2,
        sigma1,
        sigma2,
        rho,
    } = *scenario
    else {
        return Err(Error::domain("sample_biv_normal requires a biv_normal scenario"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    let cross = (1.0 - rho * rho).sqrt();
    for _ in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        y1.push(mu1 + sigma1 * z1);
        y2.push(mu2 + sigma2 * (rho * z1 + cross * z2));
    }
    LongitudinalSample::new(y1, y2)
}

/// Compound Poisson construction: a shared λ ~ Gamma(shape k, scale θ) mixes
/// two conditionally independent Poisson counts with exposures t₁, t₂.
pub fn sample_biv_negbin(
    scenario: &TrueScenario,
    n: usize,
    seed: u64,
) -> Result<LongitudinalSample> {
    scenario.validate()?;
    let TrueScenario::BivNegBin { t1, t2, theta_mix, k } = *scenario else {
        return Err(Error::domain("sample_biv_negbin requires a biv_negbin scenario"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mixing = Gamma::new(k, theta_mix)
        .map_err(|e| Error::domain(format!("mixing gamma: {e}")))?;
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    for _ in 0..n {
        let lambda: f64 = mixing.sample(&mut rng);
        y1.push(poisson_draw(&mut rng, lambda * t1)?);
        y2.push(poisson_draw(&mut rng, lambda * t2)?);
    }
    LongitudinalSample::new(y1, y2)
}

fn poisson_draw(rng: &mut ChaCha8Rng, rate: f64) -> Result<f64> {
    if rate == 0.0 {
        return Ok(0.0);
    }
    let d = Poisson::new(rate).map_err(|e| Error::domain(format!("poisson rate {rate}: {e}")))?;
    Ok(d.sample(rng))
}

/// Beta-mixed bivariate gamma: W ~ Beta(α, θ) multiplies independent
/// U ~ Gamma(α+θ, μ₁/α) and V ~ Gamma(α+θ, μ₂/α), giving GA(μ_t, σ) margins
/// with α = 1/σ².
pub fn sample_biv_gamma(
    scenario: &TrueScenario,
    n: usize,
    seed: u64,
) -> Result<LongitudinalSample> {
    scenario.validate()?;
    let TrueScenario::BivGamma { mu1, mu2, sigma, theta } = *scenario else {
        return Err(Error::domain("sample_biv_gamma requires a biv_gamma scenario"));
    };
    let alpha = 1.0 / (sigma * sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = Beta::new(alpha, theta).map_err(|e| Error::domain(format!("beta: {e}")))?;
    let u_dist = Gamma::new(alpha + theta, mu1 / alpha)
        .map_err(|e| Error::domain(format!("gamma u: {e}")))?;
    let v_dist = Gamma::new(alpha + theta, mu2 / alpha)
        .map_err(|e| Error::domain(format!("gamma v: {e}")))?;
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    for _ in 0..n {
        let w: f64 = beta.sample(&mut rng);
        let u: f64 = u_dist.sample(&mut rng);
        let v: f64 = v_dist.sample(&mut rng);
        y1.push(w * u);
        y2.push(w * v);
    }
    LongitudinalSample::new(y1, y2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::kendall_tau;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn var(xs: &[f64]) -> f64 {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    }

    fn cov(xs: &[f64], ys: &[f64]) -> f64 {
        let (mx, my) = (mean(xs), mean(ys));
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / (xs.len() - 1) as f64
    }

    fn corr(xs: &[f64], ys: &[f64]) -> f64 {
        cov(xs, ys) / (var(xs) * var(ys)).sqrt()
    }

    #[test]
    fn normal_independent_case() {
        let s = TrueScenario::BivNormal {
            mu1: 1.0,
            mu2: 2.0,
            sigma1: 1.0,
            sigma2: 2.0,
            rho: 0.0,
        };
        let n = 40_000;
        let d = sample_biv_normal(&s, n, 42).unwrap();
        let tol = 3.0 / (n as f64).sqrt();
        assert!(corr(d.y1(), d.y2()).abs() < tol);
        assert!((mean(d.y1()) - 1.0).abs() < 3.0 / (n as f64).sqrt());
        assert!((mean(d.y2()) - 2.0).abs() < 6.0 / (n as f64).sqrt());
    }

    #[test]
    fn normal_tau_matches_gaussian_identity() {
        let s = TrueScenario::BivNormal {
            mu1: 1.0,
            mu2: 2.0,
            sigma1: 1.0,
            sigma2: 1.0,
            rho: 0.9,
        };
        let d = sample_biv_normal(&s, 100_000, 7).unwrap();
        let tau = kendall_tau(&d.pairs()).unwrap();
        let want = 2.0 / std::f64::consts::PI * 0.9_f64.asin();
        assert!((tau - want).abs() < 0.02, "tau={tau} want={want}");
    }

    #[test]
    fn negbin_unit_parameters_moments() {
        // t1 = t2 = θ = k = 1: mean 1, Var = μ + σμ² = 2, Cov = σμ² = 1
        let s = TrueScenario::BivNegBin {
            t1: 1.0,
            t2: 1.0,
            theta_mix: 1.0,
            k: 1.0,
        };
        let n = 1_000_000;
        let d = sample_biv_negbin(&s, n, 11).unwrap();
        assert!((mean(d.y1()) - 1.0).abs() < 0.006);
        assert!((var(d.y1()) - 2.0).abs() < 0.05);
        assert!((cov(d.y1(), d.y2()) - 1.0).abs() < 0.05);
    }

    #[test]
    fn negbin_large_k_kills_dependence() {
        let s = TrueScenario::BivNegBin {
            t1: 1.0,
            t2: 1.0,
            theta_mix: 1e-3,
            k: 1e3,
        };
        let d = sample_biv_negbin(&s, 100_000, 13).unwrap();
        assert!(cov(d.y1(), d.y2()).abs() < 0.01);
    }

    #[test]
    fn negbin_method_of_moments_recovers_sigma() {
        let s = TrueScenario::BivNegBin {
            t1: 2.0,
            t2: 0.5,
            theta_mix: 1.5,
            k: 2.0,
        };
        let d = sample_biv_negbin(&s, 500_000, 17).unwrap();
        for ys in [d.y1(), d.y2()] {
            let m = mean(ys);
            let v = var(ys);
            let sigma_hat = (v - m) / (m * m);
            assert!((sigma_hat - 0.5).abs() < 0.02, "sigma_hat={sigma_hat}");
        }
    }

    #[test]
    fn gamma_marginals_and_correlation() {
        let s = TrueScenario::BivGamma {
            mu1: 2.0,
            mu2: 2.4,
            sigma: 1.0,
            theta: 1.0,
        };
        let n = 400_000;
        let d = sample_biv_gamma(&s, n, 19).unwrap();
        // corr = σ√θ/(1+σ²+σ²θ) = 1/3
        assert!((corr(d.y1(), d.y2()) - 1.0 / 3.0).abs() < 0.01);
        assert!((mean(d.y1()) - 2.0).abs() < 0.02);
        assert!((var(d.y1()) - 4.0).abs() < 0.15);
        assert!((mean(d.y2()) - 2.4).abs() < 0.02);
    }

    #[test]
    fn gamma_vanishing_theta_kills_tau() {
        let s = TrueScenario::BivGamma {
            mu1: 2.0,
            mu2: 2.4,
            sigma: 0.8,
            theta: 1e-3,
        };
        let d = sample_biv_gamma(&s, 100_000, 23).unwrap();
        let tau = kendall_tau(&d.pairs()).unwrap();
        assert!(tau.abs() < 0.05, "tau={tau}");
    }

    #[test]
    fn seeded_determinism() {
        let s = TrueScenario::BivGamma {
            mu1: 3.0,
            mu2: 3.6,
            sigma: 0.9,
            theta: 0.7,
        };
        let a = sample_scenario(&s, 500, 99).unwrap();
        let b = sample_scenario(&s, 500, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_scenario(&s, 500, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn wrong_generator_rejected() {
        let s = TrueScenario::BivNormal {
            mu1: 0.0,
            mu2: 0.0,
            sigma1: 1.0,
            sigma2: 1.0,
            rho: 0.0,
        };
        assert!(sample_biv_gamma(&s, 10, 1).is_err());
        assert!(sample_biv_negbin(&s, 10, 1).is_err());
    }
}
