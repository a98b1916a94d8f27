//! Kendall's tau ↔ θ maps.
//!
//! Closed forms where they exist (Clayton, Gumbel/Hougaard, Gaussian/t, FGM,
//! AMH, Frank via the Debye function); Joe and Plackett evaluate
//! τ = 1 − 4 ∫∫ ∂C/∂u · ∂C/∂v du dv numerically. Inversion is bracketed
//! bisection on the monotone map.

use super::model::{CopulaFamily, CopulaModel, Rotation};
use crate::error::{Error, Result};
use crate::specfun::QuadratureRule;
use std::sync::OnceLock;

/// τ attainable range of the base (unrotated) family, open or closed ends
/// handled by the inversion bracket.
pub fn tau_range(family: CopulaFamily) -> (f64, f64) {
    match family {
        CopulaFamily::Clayton => (0.0, 1.0),
        CopulaFamily::Gaussian | CopulaFamily::StudentT => (-1.0, 1.0),
        CopulaFamily::Frank => (-1.0, 1.0),
        CopulaFamily::Gumbel | CopulaFamily::Joe | CopulaFamily::Hougaard => (0.0, 1.0),
        CopulaFamily::Amh => (AMH_TAU_MIN, 1.0 / 3.0),
        CopulaFamily::Fgm => (-2.0 / 9.0, 2.0 / 9.0),
        CopulaFamily::Plackett => (-1.0, 1.0),
    }
}

/// τ at θ → −1⁺ for AMH: 5/3 − (8/3)·ln 2.
pub const AMH_TAU_MIN: f64 = 5.0 / 3.0 - 8.0 * std::f64::consts::LN_2 / 3.0;

pub fn tau_from_theta(model: &CopulaModel) -> Result<f64> {
    model.validate()?;
    let th = model.theta;
    let base = match model.family {
        CopulaFamily::Clayton => th / (th + 2.0),
        CopulaFamily::Gaussian | CopulaFamily::StudentT => {
            2.0 / std::f64::consts::PI * th.asin()
        }
        CopulaFamily::Gumbel | CopulaFamily::Hougaard => 1.0 - 1.0 / th,
        CopulaFamily::Fgm => 2.0 * th / 9.0,
        CopulaFamily::Frank => frank_tau(th),
        CopulaFamily::Amh => amh_tau(th),
        CopulaFamily::Joe => joe_tau(th),
        CopulaFamily::Plackett => numeric_tau(&model.clone().with_rotation(Rotation::None))?,
    };
    Ok(match model.rotation {
        Rotation::None | Rotation::Deg180 => base,
        Rotation::Deg90 | Rotation::Deg270 => -base,
    })
}

/// Invert τ → θ for the unrotated family.
pub fn theta_from_tau(family: CopulaFamily, tau: f64) -> Result<CopulaModel> {
    let (lo, hi) = tau_range(family);
    let out_of_range = !(tau > lo && tau < hi)
        || (family == CopulaFamily::Frank && tau == 0.0)
        || (family == CopulaFamily::Plackett && tau == 0.0)
        || (family == CopulaFamily::Clayton && tau <= 0.0);
    if out_of_range {
        return Err(Error::UnattainableTau {
            family: family.name(),
            tau,
            lo,
            hi,
        });
    }
    let theta = match family {
        CopulaFamily::Clayton => 2.0 * tau / (1.0 - tau),
        CopulaFamily::Gaussian | CopulaFamily::StudentT => {
            (std::f64::consts::FRAC_PI_2 * tau).sin()
        }
        CopulaFamily::Gumbel | CopulaFamily::Hougaard => {
            if tau == 0.0 {
                1.0
            } else {
                1.0 / (1.0 - tau)
            }
        }
        CopulaFamily::Fgm => 4.5 * tau,
        CopulaFamily::Frank => invert_monotone_tau(|t| Ok(frank_tau(t)), tau, -745.0, 745.0)?,
        CopulaFamily::Amh => invert_monotone_tau(|t| Ok(amh_tau(t)), tau, -1.0 + 1e-12, 1.0 - 1e-12)?,
        CopulaFamily::Joe => {
            if tau == 0.0 {
                1.0
            } else {
                invert_monotone_tau(|t| Ok(joe_tau(t)), tau, 1.0, 1e7)?
            }
        }
        CopulaFamily::Plackett => {
            let z = invert_monotone_tau(
                |z| {
                    let theta = z.exp();
                    if (theta - 1.0).abs() < 1e-12 {
                        return Ok(0.0); // independence limit the domain excludes
                    }
                    numeric_tau(&CopulaModel::new(CopulaFamily::Plackett, theta)?)
                },
                tau,
                -12.0,
                12.0,
            )?;
            z.exp()
        }
    };
    CopulaModel::new(family, theta)
}

/// Bisection for τ(θ) = target on a monotone-increasing map.
fn invert_monotone_tau(
    tau_of: impl Fn(f64) -> Result<f64>,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let f_lo = tau_of(lo)?;
    let f_hi = tau_of(hi)?;
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::convergence(format!(
            "tau {target} outside bracket [{f_lo}, {f_hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = tau_of(mid)?;
        if (f_mid - target).abs() < 1e-9 || hi - lo < 1e-12 * hi.abs().max(1.0) {
            return Ok(mid);
        }
        if f_mid < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// τ = 1 − 4 ∫∫ ∂C/∂u ∂C/∂v du dv on a panelled Gauss–Legendre grid; both
/// partials are conditionals, which every family exposes. The 4×4 panelling
/// keeps the rule honest when strong dependence sharpens the conditionals.
pub(crate) fn numeric_tau(model: &CopulaModel) -> Result<f64> {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (nodes, weights) = NODES.get_or_init(|| {
        let base = QuadratureRule::gauss_legendre(24).expect("GL");
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in 0..4 {
            let lo = p as f64 / 4.0;
            for (&x, &w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(lo + (x + 1.0) / 8.0);
                weights.push(w / 8.0);
            }
        }
        (nodes, weights)
    });
    let mut acc = 0.0;
    for (&u, &wu) in nodes.iter().zip(weights) {
        for (&v, &wv) in nodes.iter().zip(weights) {
            let du = model.conditional(v, u)?;
            let dv = model.conditional(u, v)?;
            acc += wu * wv * du * dv;
        }
    }
    Ok(1.0 - 4.0 * acc)
}

/// Joe: τ = 1 − 4 Σ_{k≥1} 1/(k(θk+2)(θ(k−1)+2)); the series converges like
/// k⁻³ and reduces to τ = 0 at θ = 1.
fn joe_tau(theta: f64) -> f64 {
    let mut sum = 0.0;
    for k in 1..200_000u64 {
        let kf = k as f64;
        let term = 1.0 / (kf * (theta * kf + 2.0) * (theta * (kf - 1.0) + 2.0));
        sum += term;
        if term < 1e-16 * sum.max(1e-30) {
            break;
        }
    }
    1.0 - 4.0 * sum
}

/// Frank: τ = 1 − (4/θ)(1 − D₁(θ)), with the first Debye function evaluated
/// by quadrature. D₁(−x) = D₁(x) + x/2 extends it to θ < 0.
fn frank_tau(theta: f64) -> f64 {
    if theta.abs() < 1e-8 {
        return theta / 9.0; // series: τ = θ/9 − θ³/900 + …
    }
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

fn debye1(theta: f64) -> f64 {
    if theta < 0.0 {
        return debye1(-theta) - theta / 2.0;
    }
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    let rule = RULE.get_or_init(|| QuadratureRule::gauss_legendre(96).expect("GL"));
    // ∫₀^θ t/(e^t − 1) dt, integrand extended by continuity at 0
    let half = 0.5 * theta;
    let integral: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let t = half * (x + 1.0);
            let val = if t < 1e-12 { 1.0 } else { t / t.exp_m1() };
            w * val
        })
        .sum::<f64>()
        * half;
    integral / theta
}

fn amh_tau(theta: f64) -> f64 {
    if theta.abs() < 1e-3 {
        // series around 0 avoids the 0/0 in the closed form
        return 2.0 * theta / 9.0 + theta * theta / 18.0;
    }
    let om = 1.0 - theta;
    1.0 - 2.0 * (theta + om * om * om.ln()) / (3.0 * theta * theta)
}
