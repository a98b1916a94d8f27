//! Special functions and nonparametric statistics used by every other module:
//! log-gamma, normal CDF/quantile, Whittaker's W via its integral
//! representation, Kendall's tau-b, sample skewness and quadrature rules.

mod gamma;
mod kendall;
mod normal;
mod quad;
mod skewness;
mod whittaker;

pub use gamma::{digamma, log_gamma};
pub use kendall::kendall_tau;
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use quad::{tanh_sinh, QuadKind, QuadratureRule};
pub use skewness::sample_skewness;
pub use whittaker::{log_whittaker_w, whittaker_w};
