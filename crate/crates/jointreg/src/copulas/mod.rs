//! Bivariate copula toolkit: densities, CDFs, conditional distributions,
//! Kendall's tau maps, samplers and unconstrained parameter transforms for
//! ten families.

mod bvn;
mod bvt;
mod eval;
mod model;
mod sample;
pub mod tau;
pub mod transform;

pub use bvn::bvn_cdf;
pub use bvt::{bvt_cdf, t_cdf, t_quantile};
pub use eval::{copula_eval, CopulaStat};
pub use model::{CopulaFamily, CopulaModel, Rotation};
pub use sample::sample_copula;
pub use tau::{tau_from_theta, theta_from_tau};
pub use transform::{from_unconstrained, unconstrained};
