//! Wall-clock benchmarking of the fitters across sample sizes, on the most
//! demanding gamma scenario of the grids (largest dispersion, dependence and
//! means).

use super::grid::{default_models, GeneratorKind, ModelKind};
use super::io::{create_file, write_header};
use super::run::{fit_model, mix_seed};
use crate::distributions::{sample_scenario, TrueScenario};
use crate::error::Result;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub model: String,
    pub n: usize,
    pub repeat: usize,
    pub wall_ms: f64,
    pub converged: bool,
}

/// The extreme corner of the gamma lattice.
pub fn extreme_gamma_scenario() -> TrueScenario {
    TrueScenario::BivGamma {
        mu1: 21.0,
        mu2: 25.2,
        sigma: 2.1_f64.sqrt(),
        theta: 2.1,
    }
}

pub fn benchmark_runtimes(
    sizes: &[usize],
    repeats: usize,
    models: &[ModelKind],
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let scenario = extreme_gamma_scenario();
    let mut rows = Vec::new();
    for &n in sizes {
        for rep in 0..repeats {
            let d = sample_scenario(&scenario, n, mix_seed(seed, n as u64, rep as u64))?;
            for &model in models {
                let (wall_ms, converged) = match fit_model(model, &d, GeneratorKind::Gamma) {
                    Ok(fit) => (fit.wall_ms, fit.converged),
                    Err(_) => (f64::NAN, false),
                };
                rows.push(BenchRow {
                    model: model.name(),
                    n,
                    repeat: rep,
                    wall_ms,
                    converged,
                });
            }
        }
    }
    Ok(rows)
}

pub fn default_bench_models() -> Vec<ModelKind> {
    default_models()
}

pub fn hardware_description() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|text| {
            text.lines()
                .find(|l| l.starts_with("model name"))
                .map(|l| l.splitn(2, ':').nth(1).unwrap_or("").trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    format!("{cpu} ({cores} logical cores)")
}

pub fn write_bench_csv(rows: &[BenchRow], seed: u64, path: &Path) -> Result<()> {
    let mut w = create_file(path)?;
    write_header(&mut w, Some(seed), &[("hardware", hardware_description())])?;
    writeln!(w, "model,n,repeat,wall_ms,converged")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.model,
            r.n,
            r.repeat,
            if r.wall_ms.is_nan() {
                String::new()
            } else {
                format!("{:.3}", r.wall_ms)
            },
            r.converged
        )?;
    }
    Ok(())
}

/// Mean wall time per (model, n) over the repeats that converged.
pub fn mean_times(rows: &[BenchRow]) -> Vec<(String, usize, f64)> {
    let mut keys: Vec<(String, usize)> = rows.iter().map(|r| (r.model.clone(), r.n)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(model, n)| {
            let times: Vec<f64> = rows
                .iter()
                .filter(|r| r.model == model && r.n == n && r.wall_ms.is_finite())
                .map(|r| r.wall_ms)
                .collect();
            let mean = if times.is_empty() {
                f64::NAN
            } else {
                times.iter().sum::<f64>() / times.len() as f64
            };
            (model, n, mean)
        })
        .collect()
}
