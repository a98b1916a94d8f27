//! Replicate runner: samples every (cell, replicate), fits every requested
//! model, and collects flat records. Work is partitioned by (cell, replicate)
//! with RNG streams derived from the master seed, so results are identical
//! for any worker count and merged in canonical order.

use super::grid::{ExperimentGrid, GeneratorKind, ModelKind};
use crate::distributions::{sample_scenario, LongitudinalSample, TrueScenario};
use crate::error::{Error, Result};
use crate::estimators::{
    extract_time_effect, fit_gee, fit_glm, fit_glmm, fit_gjrm, FitResult, GlmmOptions,
    Parameterization,
};
use crate::selection::criteria;
use crate::specfun::kendall_tau;
use rayon::prelude::*;

/// SplitMix64 over a keyed combination of master seed and task indices.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ b.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    for _ in 0..2 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = x ^ (x >> 31);
    }
    z
}

/// One row of `records.csv`: a single model fitted to a single replicate.
/// Wall-clock time is deliberately absent — records are byte-reproducible;
/// timings live in the bench output.
#[derive(Debug, Clone)]
pub struct FitRecord {
    pub generator: GeneratorKind,
    pub cell_index: usize,
    pub replicate: usize,
    pub model: String,
    pub n: usize,
    pub mu1_true: f64,
    pub mu2_true: f64,
    pub sigma1_true: f64,
    pub sigma2_true: f64,
    pub dep_true: f64,
    pub tau_true: f64,
    pub skew_true: f64,
    pub tau_emp: f64,
    pub skew_emp: f64,
    pub status: String,
    pub converged: bool,
    pub iterations: usize,
    pub mu1_hat: f64,
    pub mu2_hat: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta_t: f64,
    pub se_beta1: f64,
    pub se_beta2: f64,
    pub se_beta_t: f64,
    pub dependence_hat: f64,
    pub loglik: Option<f64>,
    pub edf: f64,
    pub aic: Option<f64>,
    pub gaic4: Option<f64>,
    pub bic: Option<f64>,
    pub clipped: usize,
    pub re_boundary: bool,
    pub hessian_repaired: bool,
}

impl FitRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Relative bias of the time-1 mean estimate.
    pub fn rel_bias_mu1(&self) -> f64 {
        self.mu1_hat / self.mu1_true - 1.0
    }

    pub fn rel_bias_mu2(&self) -> f64 {
        self.mu2_hat / self.mu2_true - 1.0
    }

    /// True time effect on the link scale.
    pub fn beta_t_true(&self) -> f64 {
        let link = self.generator.link();
        link.apply(self.mu2_true).unwrap() - link.apply(self.mu1_true).unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub generator: GeneratorKind,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub records: Vec<FitRecord>,
}

/// Fit one model to one sample; marginal parameterization with the time
/// effect extracted by the delta method (an exact reparameterization).
pub fn fit_model(
    model: ModelKind,
    d: &LongitudinalSample,
    generator: GeneratorKind,
) -> Result<FitResult> {
    let family = generator.family();
    let link = generator.link();
    let param = Parameterization::Marginal;
    match model {
        ModelKind::Glm => fit_glm(d, family, link, param),
        ModelKind::Gee => fit_gee(d, family, link, param),
        ModelKind::Glmm => fit_glmm(d, family, link, param, GlmmOptions::default()),
        ModelKind::Gjrm(c) => fit_gjrm(d, family, family, link, c, param),
    }
}

pub fn run_grid(grid: &ExperimentGrid, workers: usize) -> Result<ScenarioReport> {
    if workers == 0 {
        return Err(Error::config("workers must be at least 1"));
    }
    grid.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;

    // deterministic per-cell truths
    let truths: Vec<(f64, f64)> = pool.install(|| {
        grid.cells
            .par_iter()
            .enumerate()
            .map(|(ci, cell)| {
                let tau = cell.kendall_tau_closed().unwrap_or_else(|| {
                    let d = sample_scenario(cell, 200_000, mix_seed(grid.seed, ci as u64, 0xA11CE))
                        .expect("validated cell");
                    kendall_tau(&d.pairs()).expect("mc tau")
                });
                let skew = 0.5 * (cell.skew(1) + cell.skew(2));
                (tau, skew)
            })
            .collect()
    });

    let tasks: Vec<(usize, usize)> = (0..grid.cells.len())
        .flat_map(|c| (0..grid.replicates_per_cell).map(move |r| (c, r)))
        .collect();

    let records: Vec<Vec<FitRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(ci, rep)| run_task(grid, ci, rep, truths[ci]))
            .collect()
    });
    let records: Vec<FitRecord> = records.into_iter().flatten().collect();

    // no silent loss
    let expected = grid.cells.len() * grid.replicates_per_cell * grid.models.len();
    assert_eq!(
        records.len(),
        expected,
        "record count mismatch: {} vs expected {expected}",
        records.len()
    );

    Ok(ScenarioReport {
        generator: grid.generator,
        n: grid.n_per_timepoint,
        replicates: grid.replicates_per_cell,
        seed: grid.seed,
        records,
    })
}

fn run_task(grid: &ExperimentGrid, ci: usize, rep: usize, truth: (f64, f64)) -> Vec<FitRecord> {
    let cell = &grid.cells[ci];
    let seed = mix_seed(grid.seed, ci as u64, rep as u64);
    let d = sample_scenario(cell, grid.n_per_timepoint, seed).expect("validated cell");
    let tau_emp = d.empirical_tau().unwrap_or(f64::NAN);
    let skew_emp = d.empirical_skew().unwrap_or(f64::NAN);

    let base = |model: &ModelKind| FitRecord {
        generator: grid.generator,
        cell_index: ci,
        replicate: rep,
        model: model.name(),
        n: grid.n_per_timepoint,
        mu1_true: cell.mu(1),
        mu2_true: cell.mu(2),
        sigma1_true: cell.sigma(1),
        sigma2_true: cell.sigma(2),
        dep_true: dep_parameter(cell),
        tau_true: truth.0,
        skew_true: truth.1,
        tau_emp,
        skew_emp,
        status: "ok".into(),
        converged: false,
        iterations: 0,
        mu1_hat: f64::NAN,
        mu2_hat: f64::NAN,
        beta1: f64::NAN,
        beta2: f64::NAN,
        beta_t: f64::NAN,
        se_beta1: f64::NAN,
        se_beta2: f64::NAN,
        se_beta_t: f64::NAN,
        dependence_hat: f64::NAN,
        loglik: None,
        edf: f64::NAN,
        aic: None,
        gaic4: None,
        bic: None,
        clipped: 0,
        re_boundary: false,
        hessian_repaired: false,
    };

    grid.models
        .iter()
        .map(|model| {
            let mut rec = base(model);
            match fit_model(*model, &d, grid.generator) {
                Ok(fit) => fill_record(&mut rec, &fit, grid.n_per_timepoint),
                Err(e) => {
                    rec.status = sanitize(&e.to_string());
                }
            }
            rec
        })
        .collect()
}

fn fill_record(rec: &mut FitRecord, fit: &FitResult, n: usize) {
    rec.converged = fit.converged;
    rec.iterations = fit.iterations;
    if let Ok((m1, m2)) = fit.mu_hat() {
        rec.mu1_hat = m1;
        rec.mu2_hat = m2;
    }
    rec.beta1 = fit.get("beta1").unwrap_or(f64::NAN);
    rec.beta2 = fit.get("beta2").unwrap_or(f64::NAN);
    rec.se_beta1 = fit.se("beta1").unwrap_or(f64::NAN);
    rec.se_beta2 = fit.se("beta2").unwrap_or(f64::NAN);
    if let Ok((bt, se)) = extract_time_effect(fit) {
        rec.beta_t = bt;
        rec.se_beta_t = se;
    }
    rec.dependence_hat = fit.get("dependence").unwrap_or(f64::NAN);
    rec.loglik = fit.loglik;
    rec.edf = fit.edf;
    if let Ok(row) = criteria(fit, 4.0, 2 * n) {
        rec.aic = row.aic;
        rec.gaic4 = row.gaic_k;
        rec.bic = row.bic;
    }
    rec.clipped = fit.diagnostics.clipped;
    rec.re_boundary = fit.diagnostics.re_boundary;
    rec.hessian_repaired = fit.diagnostics.hessian_repaired;
}

/// The generator's own dependence parameter, for the record.
fn dep_parameter(cell: &TrueScenario) -> f64 {
    match *cell {
        TrueScenario::BivNormal { rho, .. } => rho,
        TrueScenario::BivNegBin { k, .. } => 1.0 / k,
        TrueScenario::BivGamma { theta, .. } => theta,
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}
