//! Smooth bijections between each family's admissible θ domain and the real
//! line, used by the optimizers.
//!
//! Positive domains use log, interval domains atanh, θ ≥ 1 domains log(θ−1).
//! The Plackett copula (θ > 0, θ ≠ 1) also uses log; the excluded point maps
//! to z = 0 and is handled by the callers' starting values, never by the
//! optimizer landing on it exactly.

use super::model::{CopulaFamily, CopulaModel};
use crate::error::Result;

/// θ → z ∈ ℝ.
pub fn unconstrained(model: &CopulaModel) -> Result<f64> {
    model.validate()?;
    Ok(theta_to_z(model.family, model.theta))
}

/// z ∈ ℝ → valid model (Student t keeps its default df; use
/// [`CopulaModel::new_student_t`] plus a df transform for joint fits).
pub fn from_unconstrained(family: CopulaFamily, z: f64) -> Result<CopulaModel> {
    let theta = z_to_theta(family, z);
    CopulaModel::new(family, theta)
}

pub fn theta_to_z(family: CopulaFamily, theta: f64) -> f64 {
    match family {
        CopulaFamily::Clayton | CopulaFamily::Plackett => theta.ln(),
        CopulaFamily::Gaussian
        | CopulaFamily::StudentT
        | CopulaFamily::Amh
        | CopulaFamily::Fgm => theta.atanh(),
        CopulaFamily::Frank => theta,
        CopulaFamily::Gumbel | CopulaFamily::Joe | CopulaFamily::Hougaard => (theta - 1.0).ln(),
    }
}

pub fn z_to_theta(family: CopulaFamily, z: f64) -> f64 {
    match family {
        CopulaFamily::Clayton | CopulaFamily::Plackett => z.exp().max(f64::MIN_POSITIVE),
        CopulaFamily::Gaussian
        | CopulaFamily::StudentT
        | CopulaFamily::Amh
        | CopulaFamily::Fgm => z.tanh(),
        CopulaFamily::Frank => z,
        CopulaFamily::Gumbel | CopulaFamily::Joe | CopulaFamily::Hougaard => 1.0 + z.exp(),
    }
}

/// dθ/dz, for delta-method standard errors on the natural scale.
pub fn dtheta_dz(family: CopulaFamily, z: f64) -> f64 {
    match family {
        CopulaFamily::Clayton | CopulaFamily::Plackett => z.exp(),
        CopulaFamily::Gaussian
        | CopulaFamily::StudentT
        | CopulaFamily::Amh
        | CopulaFamily::Fgm => {
            let t = z.tanh();
            1.0 - t * t
        }
        CopulaFamily::Frank => 1.0,
        CopulaFamily::Gumbel | CopulaFamily::Joe | CopulaFamily::Hougaard => z.exp(),
    }
}
