//! Independence-working GLM with common dispersion, fitted by direct
//! likelihood maximization.

use super::optim::{
    information_to_vcov, maximize_with_restarts, observed_information, BfgsOptions, Objective,
};
use super::{timed, FitDiagnostics, FitResult, Parameterization};
use crate::distributions::{log_pdf, LinkFunction, LongitudinalSample, ResponseFamily};
use crate::error::{Error, Result};

const GLM_SEED: u64 = 0x61_6d;

/// Moment-based starting values on the optimizer scale:
/// (b1, b2 | b_t, log σ).
pub(crate) fn mean_disp_start(
    d: &LongitudinalSample,
    family: ResponseFamily,
    link: LinkFunction,
    param: Parameterization,
) -> Result<(f64, f64, f64)> {
    let m = |ys: &[f64]| ys.iter().sum::<f64>() / ys.len() as f64;
    let v = |ys: &[f64], mean: f64| {
        ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (ys.len() as f64 - 1.0)
    };
    let (m1, m2) = (m(d.y1()), m(d.y2()));
    let (v1, v2) = (v(d.y1(), m1), v(d.y2(), m2));
    let safe = |x: f64| x.max(1e-6);
    let b1 = link.apply(safe(m1))?;
    let b2raw = link.apply(safe(m2))?;
    let b2 = match param {
        Parameterization::Marginal => b2raw,
        Parameterization::TimeEffect => b2raw - b1,
    };
    let sigma0 = match family {
        ResponseFamily::Normal => (0.5 * (v1 + v2)).sqrt(),
        ResponseFamily::Gamma => (0.5 * (v1 / (m1 * m1) + v2 / (m2 * m2))).sqrt(),
        ResponseFamily::NegBin => {
            let s1 = (v1 - m1) / (m1 * m1);
            let s2 = (v2 - m2) / (m2 * m2);
            (0.5 * (s1 + s2)).max(0.01)
        }
    };
    Ok((b1, b2, sigma0.max(1e-4).ln()))
}

pub fn fit_glm(
    d: &LongitudinalSample,
    family: ResponseFamily,
    link: LinkFunction,
    param: Parameterization,
) -> Result<FitResult> {
    d.validate_for_family(family)?;
    let (res, wall_ms) = timed(|| -> Result<_> {
        let loglik = |psi: &[f64]| -> Option<f64> {
            let sigma = psi[2].exp();
            if !sigma.is_finite() || sigma <= 0.0 {
                return None;
            }
            let (e1, e2) = param.predictors(psi[0], psi[1]);
            let (mu1, mu2) = (link.inverse(e1), link.inverse(e2));
            if mu_invalid(family, mu1) || mu_invalid(family, mu2) {
                return None;
            }
            let mut acc = 0.0;
            for (&a, &b) in d.y1().iter().zip(d.y2()) {
                acc += log_pdf(family, mu1, sigma, a).ok()?;
                acc += log_pdf(family, mu2, sigma, b).ok()?;
            }
            acc.is_finite().then_some(acc)
        };
        let obj = Objective {
            f: &loglik,
            grad: None,
        };
        let (b1, b2, ls) = mean_disp_start(d, family, link, param)?;
        let opt = maximize_with_restarts(&obj, &[b1, b2, ls], &BfgsOptions::default(), 3, GLM_SEED)?;
        if !opt.converged {
            return Err(Error::convergence(format!(
                "GLM did not converge in {} iterations (|grad|={:.3e})",
                opt.iterations,
                opt.gradient.iter().fold(0.0f64, |a, g| a.max(g.abs()))
            )));
        }
        let info = observed_information(&obj, &opt.x)?;
        let (vcov, repaired) = information_to_vcov(&info)?;
        Ok((opt, vcov, repaired))
    });
    let (opt, vcov, repaired) = res?;
    let (n1, n2) = param.coef_names();
    Ok(FitResult {
        model: "glm".into(),
        parameterization: param,
        link,
        names: vec![n1.into(), n2.into(), "log_sigma".into()],
        estimates: opt.x.clone(),
        vcov,
        aux: vec![],
        loglik: Some(opt.value),
        edf: 3.0,
        converged: opt.converged,
        iterations: opt.iterations,
        wall_ms,
        diagnostics: FitDiagnostics {
            hessian_repaired: repaired,
            ..Default::default()
        },
    })
}

pub(crate) fn mu_invalid(family: ResponseFamily, mu: f64) -> bool {
    !mu.is_finite()
        || mu > 1e12
        || (!matches!(family, ResponseFamily::Normal) && mu <= 0.0)
}
