//! Joint copula regression: simultaneous maximum likelihood over two
//! marginal regressions and the copula dependence parameter.
//!
//! Continuous margins contribute log f₁ + log f₂ + log c(F₁, F₂; θ).
//! Discrete margins use the rectangle probability
//!   P(Y₁=y₁, Y₂=y₂) = C(F₁(y₁), F₂(y₂)) − C(F₁(y₁−1), F₂(y₂))
//!                     − C(F₁(y₁), F₂(y₂−1)) + C(F₁(y₁−1), F₂(y₂−1)),
//! the density-times-copula form being invalid off the lattice.

use super::glm::mu_invalid;
use super::optim::{
    information_to_vcov, maximize_with_restarts, observed_information, BfgsOptions, Objective,
};
use super::{timed, FitDiagnostics, FitResult, Parameterization};
use crate::copulas::{theta_from_tau, CopulaFamily, CopulaModel, Rotation};
use crate::copulas::tau_from_theta;
use crate::distributions::{cdf, log_pdf, LinkFunction, LongitudinalSample, ResponseFamily};
use crate::error::{Error, Result};
use std::collections::HashMap;

const GJRM_SEED: u64 = 0x6a72;
/// PIT clipping bounds for copula evaluation inside likelihoods.
const PIT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct GjrmOptions {
    /// Hold the dependence parameter fixed at this θ instead of estimating it.
    pub fix_dependence: Option<f64>,
    /// Rotation applied to the copula (default unrotated).
    pub rotation: Rotation,
    /// Restarts with jittered starts after a failed attempt.
    pub restarts: usize,
}

impl Default for GjrmOptions {
    fn default() -> Self {
        Self {
            fix_dependence: None,
            rotation: Rotation::None,
            restarts: 3,
        }
    }
}

pub fn fit_gjrm(
    d: &LongitudinalSample,
    family1: ResponseFamily,
    family2: ResponseFamily,
    link: LinkFunction,
    copula: CopulaFamily,
    param: Parameterization,
) -> Result<FitResult> {
    fit_gjrm_with(d, family1, family2, link, copula, param, GjrmOptions::default())
}

pub fn fit_gjrm_with(
    d: &LongitudinalSample,
    family1: ResponseFamily,
    family2: ResponseFamily,
    link: LinkFunction,
    copula: CopulaFamily,
    param: Parameterization,
    opts: GjrmOptions,
) -> Result<FitResult> {
    d.validate_for_family(family1)?;
    if family1.is_discrete() != family2.is_discrete() {
        return Err(Error::config(
            "mixed discrete/continuous margins are not supported",
        ));
    }
    let (res, wall_ms) = timed(|| gjrm_inner(d, family1, family2, link, copula, param, opts));
    let mut fit = res?;
    fit.wall_ms = wall_ms;
    Ok(fit)
}

/// Parameter layout helper: ψ = (b1, b2, lsig1, lsig2 [, z_dep [, z_df]]).
struct Layout {
    estimate_dep: bool,
    student_df: bool,
}

impl Layout {
    fn dim(&self) -> usize {
        4 + usize::from(self.estimate_dep) + usize::from(self.student_df)
    }
}

fn gjrm_inner(
    d: &LongitudinalSample,
    family1: ResponseFamily,
    family2: ResponseFamily,
    link: LinkFunction,
    copula: CopulaFamily,
    param: Parameterization,
    opts: GjrmOptions,
) -> Result<FitResult> {
    let layout = Layout {
        estimate_dep: opts.fix_dependence.is_none(),
        student_df: copula == CopulaFamily::StudentT && opts.fix_dependence.is_none(),
    };
    let discrete = family1.is_discrete();
    let grouped = if discrete { Some(group_pairs(d)) } else { None };

    let build_model = |psi: &[f64]| -> Option<CopulaModel> {
        let theta = match opts.fix_dependence {
            Some(t) => t,
            None => crate::copulas::transform::z_to_theta(copula, psi[4]),
        };
        let mut m = if copula == CopulaFamily::StudentT {
            let df = if layout.student_df {
                2.0 + psi[5].exp()
            } else {
                4.0
            };
            CopulaModel::new_student_t(theta, df).ok()?
        } else {
            CopulaModel::new(copula, theta).ok()?
        };
        m.rotation = opts.rotation;
        Some(m)
    };

    let loglik = |psi: &[f64]| -> Option<f64> {
        eval_loglik(
            d,
            grouped.as_deref(),
            family1,
            family2,
            link,
            param,
            psi,
            &build_model(psi)?,
            None,
        )
    };

    let start = starting_values(d, family1, family2, link, copula, param, &layout)?;
    let obj = Objective {
        f: &loglik,
        grad: None,
    };
    let opt = maximize_with_restarts(&obj, &start, &BfgsOptions::default(), opts.restarts, GJRM_SEED)?;
    if !opt.converged {
        return Err(Error::convergence(format!(
            "GJRM({}) did not converge in {} iterations",
            copula.name(),
            opt.iterations
        )));
    }

    let info = observed_information(&obj, &opt.x)?;
    let (mut vcov, repaired) = information_to_vcov(&info)?;

    // count PIT clips at the optimum
    let mut clipped = 0usize;
    let model = build_model(&opt.x).ok_or_else(|| Error::convergence("invalid final copula"))?;
    eval_loglik(
        d,
        grouped.as_deref(),
        family1,
        family2,
        link,
        param,
        &opt.x,
        &model,
        Some(&mut clipped),
    );

    // natural-scale dependence entry via the delta method
    let mut estimates = opt.x.clone();
    let mut names: Vec<String> = {
        let (n1, n2) = param.coef_names();
        vec![n1.into(), n2.into(), "log_sigma1".into(), "log_sigma2".into()]
    };
    if layout.estimate_dep {
        let jac = crate::copulas::transform::dtheta_dz(copula, opt.x[4]);
        estimates[4] = crate::copulas::transform::z_to_theta(copula, opt.x[4]);
        for j in 0..vcov.nrows() {
            vcov[(4, j)] *= jac;
            vcov[(j, 4)] *= jac;
        }
        names.push("dependence".into());
    }
    if layout.student_df {
        let jac = opt.x[5].exp();
        estimates[5] = 2.0 + opt.x[5].exp();
        for j in 0..vcov.nrows() {
            vcov[(5, j)] *= jac;
            vcov[(j, 5)] *= jac;
        }
        names.push("df".into());
    }

    let edf = names.len() as f64;
    let aux = if layout.estimate_dep {
        vec![(
            "tau".to_string(),
            tau_from_theta(&model).unwrap_or(f64::NAN),
        )]
    } else {
        vec![("dependence".to_string(), opts.fix_dependence.unwrap())]
    };

    Ok(FitResult {
        model: format!("gjrm_{}", copula.name()),
        parameterization: param,
        link,
        names,
        estimates,
        vcov,
        aux,
        loglik: Some(opt.value),
        edf,
        converged: opt.converged,
        iterations: opt.iterations,
        wall_ms: 0.0,
        diagnostics: FitDiagnostics {
            clipped,
            hessian_repaired: repaired,
            ..Default::default()
        },
    })
}

/// Deduplicated (y1, y2) pairs with multiplicities, for count margins.
fn group_pairs(d: &LongitudinalSample) -> Box<[((u64, u64), f64)]> {
    let mut map: HashMap<(u64, u64), f64> = HashMap::new();
    for (&a, &b) in d.y1().iter().zip(d.y2()) {
        *map.entry((a as u64, b as u64)).or_insert(0.0) += 1.0;
    }
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort_unstable_by_key(|&((a, b), _)| (a, b));
    v.into_boxed_slice()
}

#[allow(clippy::too_many_arguments)]
fn eval_loglik(
    d: &LongitudinalSample,
    grouped: Option<&[((u64, u64), f64)]>,
    family1: ResponseFamily,
    family2: ResponseFamily,
    link: LinkFunction,
    param: Parameterization,
    psi: &[f64],
    model: &CopulaModel,
    mut clip_counter: Option<&mut usize>,
) -> Option<f64> {
    if psi.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let (ls1, ls2) = (psi[2], psi[3]);
    if !(-15.0..=10.0).contains(&ls1) || !(-15.0..=10.0).contains(&ls2) {
        return None;
    }
    let (sigma1, sigma2) = (ls1.exp(), ls2.exp());
    let (e1, e2) = param.predictors(psi[0], psi[1]);
    let (mu1, mu2) = (link.inverse(e1), link.inverse(e2));
    if mu_invalid(family1, mu1) || mu_invalid(family2, mu2) {
        return None;
    }

    let mut total = 0.0;
    match grouped {
        None => {
            // continuous margins: density + copula density at the PITs
            for (&a, &b) in d.y1().iter().zip(d.y2()) {
                let lf1 = log_pdf(family1, mu1, sigma1, a).ok()?;
                let lf2 = log_pdf(family2, mu2, sigma2, b).ok()?;
                let (u, cu) = clip_pit(cdf(family1, mu1, sigma1, a).ok()?);
                let (v, cv) = clip_pit(cdf(family2, mu2, sigma2, b).ok()?);
                if let Some(c) = clip_counter.as_deref_mut() {
                    *c += usize::from(cu) + usize::from(cv);
                }
                let lc = model.log_density(u, v).ok()?;
                total += lf1 + lf2 + lc;
            }
        }
        Some(pairs) => {
            // discrete margins: rectangle probabilities over unique pairs,
            // with each margin's CDF values cached per unique count
            let mut cache1: HashMap<u64, (f64, f64)> = HashMap::new();
            let mut cache2: HashMap<u64, (f64, f64)> = HashMap::new();
            for &((y1, y2), count) in pairs {
                let (u_hi, u_lo) = *match cache1.entry(y1) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        let hi = cdf(family1, mu1, sigma1, y1 as f64).ok()?;
                        let lo = if y1 == 0 {
                            0.0
                        } else {
                            cdf(family1, mu1, sigma1, y1 as f64 - 1.0).ok()?
                        };
                        e.insert((hi, lo))
                    }
                };
                let (v_hi, v_lo) = *match cache2.entry(y2) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        let hi = cdf(family2, mu2, sigma2, y2 as f64).ok()?;
                        let lo = if y2 == 0 {
                            0.0
                        } else {
                            cdf(family2, mu2, sigma2, y2 as f64 - 1.0).ok()?
                        };
                        e.insert((hi, lo))
                    }
                };
                let p = rectangle_probability(model, u_lo, u_hi, v_lo, v_hi)?;
                if let Some(c) = clip_counter.as_deref_mut() {
                    if p <= 1e-300 {
                        *c += 1;
                    }
                }
                total += count * p.max(1e-300).ln();
            }
        }
    }
    total.is_finite().then_some(total)
}

fn clip_pit(u: f64) -> (f64, bool) {
    if u < PIT_EPS {
        (PIT_EPS, true)
    } else if u > 1.0 - PIT_EPS {
        (1.0 - PIT_EPS, true)
    } else {
        (u, false)
    }
}

/// C-volume of the rectangle (u_lo, u_hi] × (v_lo, v_hi], with exact
/// boundary limits C(0,·) = 0, C(1,v) = v.
fn rectangle_probability(
    model: &CopulaModel,
    u_lo: f64,
    u_hi: f64,
    v_lo: f64,
    v_hi: f64,
) -> Option<f64> {
    let c = |u: f64, v: f64| -> Option<f64> {
        if u <= PIT_EPS || v <= PIT_EPS {
            return Some(0.0);
        }
        let (uc, vc) = (u.min(1.0 - PIT_EPS), v.min(1.0 - PIT_EPS));
        if u >= 1.0 - PIT_EPS && v >= 1.0 - PIT_EPS {
            return Some(1.0 - (1.0 - u) - (1.0 - v)); // upper corner limit
        }
        if u >= 1.0 - PIT_EPS {
            return Some(v);
        }
        if v >= 1.0 - PIT_EPS {
            return Some(u);
        }
        model.cdf(uc, vc).ok()
    };
    let p = c(u_hi, v_hi)? - c(u_lo, v_hi)? - c(u_hi, v_lo)? + c(u_lo, v_lo)?;
    Some(p.max(0.0))
}

fn starting_values(
    d: &LongitudinalSample,
    family1: ResponseFamily,
    family2: ResponseFamily,
    link: LinkFunction,
    copula: CopulaFamily,
    param: Parameterization,
    layout: &Layout,
) -> Result<Vec<f64>> {
    let per_margin = |ys: &[f64], family: ResponseFamily| -> Result<(f64, f64)> {
        let n = ys.len() as f64;
        let m = ys.iter().sum::<f64>() / n;
        let v = ys.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0);
        let b = link.apply(m.max(1e-6))?;
        let sigma0 = match family {
            ResponseFamily::Normal => v.sqrt(),
            ResponseFamily::Gamma => (v / (m * m)).sqrt(),
            ResponseFamily::NegBin => ((v - m) / (m * m)).max(0.01),
        };
        Ok((b, sigma0.max(1e-4).ln()))
    };
    let (b1, ls1) = per_margin(d.y1(), family1)?;
    let (b2raw, ls2) = per_margin(d.y2(), family2)?;
    let b2 = match param {
        Parameterization::Marginal => b2raw,
        Parameterization::TimeEffect => b2raw - b1,
    };
    let mut start = vec![b1, b2, ls1, ls2];
    if layout.estimate_dep {
        let tau_hat = d.empirical_tau().unwrap_or(0.0);
        let (lo, hi) = crate::copulas::tau::tau_range(copula);
        let margin = 0.03 * (hi - lo);
        let mut tau0 = tau_hat.clamp(lo + margin, hi - margin);
        if tau0.abs() < 0.01 {
            tau0 = 0.05_f64.clamp(lo + margin, hi - margin);
        }
        let theta0 = theta_from_tau(copula, tau0)?.theta;
        start.push(crate::copulas::transform::theta_to_z(copula, theta0));
    }
    if layout.student_df {
        start.push((6.0_f64 - 2.0).ln());
    }
    Ok(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_scenario, TrueScenario};
    use crate::estimators::fit_glm;

    #[test]
    fn fixed_independence_matches_margin_mles() {
        let s = TrueScenario::BivGamma {
            mu1: 2.0,
            mu2: 2.4,
            sigma: 0.7,
            theta: 1.0,
        };
        let d = sample_scenario(&s, 400, 41).unwrap();
        let fit = fit_gjrm_with(
            &d,
            ResponseFamily::Gamma,
            ResponseFamily::Gamma,
            LinkFunction::Log,
            CopulaFamily::Fgm,
            Parameterization::Marginal,
            GjrmOptions {
                fix_dependence: Some(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        // likelihood separates: each margin's (β, σ) is that margin's MLE;
        // oracle via a single-margin GLM on duplicated data
        let d1 =
            LongitudinalSample::new(d.y1().to_vec(), d.y1().to_vec()).unwrap();
        let glm1 = fit_glm(
            &d1,
            ResponseFamily::Gamma,
            LinkFunction::Log,
            Parameterization::Marginal,
        )
        .unwrap();
        assert!(
            (fit.get("beta1").unwrap() - glm1.get("beta1").unwrap()).abs() < 1e-5,
            "{} vs {}",
            fit.get("beta1").unwrap(),
            glm1.get("beta1").unwrap()
        );
        assert!(
            (fit.get("log_sigma1").unwrap() - glm1.get("log_sigma").unwrap()).abs() < 1e-4
        );
    }

    #[test]
    fn normal_margins_gaussian_copula_hits_closed_form_mle() {
        let s = TrueScenario::BivNormal {
            mu1: 1.0,
            mu2: 2.0,
            sigma1: 1.0,
            sigma2: 1.5,
            rho: 0.6,
        };
        let d = sample_scenario(&s, 600, 43).unwrap();
        let fit = fit_gjrm(
            &d,
            ResponseFamily::Normal,
            ResponseFamily::Normal,
            LinkFunction::Identity,
            CopulaFamily::Gaussian,
            Parameterization::Marginal,
        )
        .unwrap();
        // closed-form bivariate-normal MLE
        let n = d.n() as f64;
        let m1: f64 = d.y1().iter().sum::<f64>() / n;
        let m2: f64 = d.y2().iter().sum::<f64>() / n;
        let s1 = (d.y1().iter().map(|y| (y - m1) * (y - m1)).sum::<f64>() / n).sqrt();
        let s2 = (d.y2().iter().map(|y| (y - m2) * (y - m2)).sum::<f64>() / n).sqrt();
        let rho = d
            .y1()
            .iter()
            .zip(d.y2())
            .map(|(a, b)| (a - m1) * (b - m2))
            .sum::<f64>()
            / (n * s1 * s2);
        assert!((fit.get("beta1").unwrap() - m1).abs() < 1e-5);
        assert!((fit.get("beta2").unwrap() - m2).abs() < 1e-5);
        assert!((fit.get("log_sigma1").unwrap() - s1.ln()).abs() < 1e-4);
        assert!((fit.get("log_sigma2").unwrap() - s2.ln()).abs() < 1e-4);
        assert!(
            (fit.get("dependence").unwrap() - rho).abs() < 1e-4,
            "{} vs {rho}",
            fit.get("dependence").unwrap()
        );
        assert_eq!(fit.edf, 5.0);
        assert!(fit.vcov_is_valid(1e-8));
    }

    #[test]
    fn clayton_recovers_dependence_on_gamma_margins() {
        let s = TrueScenario::BivGamma {
            mu1: 3.0,
            mu2: 3.6,
            sigma: 0.8,
            theta: 1.5,
        };
        let d = sample_scenario(&s, 800, 47).unwrap();
        let fit = fit_gjrm(
            &d,
            ResponseFamily::Gamma,
            ResponseFamily::Gamma,
            LinkFunction::Log,
            CopulaFamily::Clayton,
            Parameterization::Marginal,
        )
        .unwrap();
        assert!(fit.converged);
        let (mu1_hat, mu2_hat) = fit.mu_hat().unwrap();
        assert!((mu1_hat - 3.0).abs() < 0.3, "mu1={mu1_hat}");
        assert!((mu2_hat - 3.6).abs() < 0.35, "mu2={mu2_hat}");
        // dependence should land near the scenario's tau
        let tau_fit = fit.get("tau").unwrap();
        let tau_data = d.empirical_tau().unwrap();
        assert!((tau_fit - tau_data).abs() < 0.08, "{tau_fit} vs {tau_data}");
    }

    #[test]
    fn discrete_rectangle_likelihood_fits_negbin() {
        let s = TrueScenario::BivNegBin {
            t1: 1.0,
            t2: 1.5,
            theta_mix: 1.2,
            k: 1.0,
        };
        let d = sample_scenario(&s, 500, 53).unwrap();
        let fit = fit_gjrm(
            &d,
            ResponseFamily::NegBin,
            ResponseFamily::NegBin,
            LinkFunction::Log,
            CopulaFamily::Clayton,
            Parameterization::Marginal,
        )
        .unwrap();
        assert!(fit.converged);
        let (mu1_hat, mu2_hat) = fit.mu_hat().unwrap();
        let m1: f64 = d.y1().iter().sum::<f64>() / d.n() as f64;
        let m2: f64 = d.y2().iter().sum::<f64>() / d.n() as f64;
        assert!((mu1_hat - m1).abs() < 0.25 * m1, "{mu1_hat} vs {m1}");
        assert!((mu2_hat - m2).abs() < 0.25 * m2);
        assert!(fit.get("dependence").unwrap() > 0.0);
    }

    #[test]
    fn mixed_margins_rejected() {
        let d = LongitudinalSample::new(vec![1.0, 2.0, 3.0], vec![1.5, 2.5, 3.5]).unwrap();
        assert!(fit_gjrm(
            &d,
            ResponseFamily::NegBin,
            ResponseFamily::Gamma,
            LinkFunction::Log,
            CopulaFamily::Clayton,
            Parameterization::Marginal,
        )
        .is_err());
    }
}
