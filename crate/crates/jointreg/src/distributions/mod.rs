//! GAMLSS-parameterized response families, link functions, the three
//! bivariate scenario generators and their true-parameter bookkeeping.

mod bivgamma;
mod family;
mod generators;
mod sample;
mod scenario;

pub use bivgamma::{biv_gamma_log_pdf, biv_gamma_pdf};
pub use family::{
    cdf, curvature_eta, dscore_dmu, family_eval, log_pdf, quantile, score_eta, score_log_sigma,
    score_mu, FamilyStat, LinkFunction, ResponseFamily,
};
pub use generators::{sample_biv_gamma, sample_biv_negbin, sample_biv_normal, sample_scenario};
pub use sample::LongitudinalSample;
pub use scenario::{biv_negbin_log_pmf, scenario_truth, ScenarioTruth, TrueScenario};
