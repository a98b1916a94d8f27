//! Records CSV round-trip and the binned bias/SE/selection summaries.
//!
//! Binning follows the paper's table layout: Kendall's tau in width-0.2 bins
//! and skewness in unit bins, both on the per-replicate sample values.
//! Aggregation is a pure function of the record set, so recomputing from
//! `records.csv` reproduces the summary byte for byte.

use super::grid::GeneratorKind;
use super::io::{
    create_file, fmt_f64, fmt_opt, parse_f64, parse_opt, read_lines, write_header,
};
use super::run::{FitRecord, ScenarioReport};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const TAU_BINS: usize = 5;
pub const SKEW_BINS: usize = 6;

pub fn tau_bin(tau: f64) -> usize {
    ((tau * 5.0).floor() as isize).clamp(0, TAU_BINS as isize - 1) as usize
}

pub fn skew_bin(skew: f64) -> usize {
    (skew.floor() as isize).clamp(0, SKEW_BINS as isize - 1) as usize
}

pub fn tau_bin_label(i: usize) -> String {
    format!("{:.1}-{:.1}", i as f64 * 0.2, (i + 1) as f64 * 0.2)
}

pub fn skew_bin_label(i: usize) -> String {
    format!("{}-{}", i, i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    Skew,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tau" => Ok(Axis::Tau),
            "skew" | "skewness" => Ok(Axis::Skew),
            other => Err(Error::config(format!("unknown axis '{other}'"))),
        }
    }

    fn bins(self) -> usize {
        match self {
            Axis::Tau => TAU_BINS,
            Axis::Skew => SKEW_BINS,
        }
    }

    fn other_bins(self) -> usize {
        match self {
            Axis::Tau => SKEW_BINS,
            Axis::Skew => TAU_BINS,
        }
    }

    fn label(self, i: usize) -> String {
        match self {
            Axis::Tau => tau_bin_label(i),
            Axis::Skew => skew_bin_label(i),
        }
    }

    fn other_label(self, i: usize) -> String {
        match self {
            Axis::Tau => format!("skew_{}", skew_bin_label(i)),
            Axis::Skew => format!("tau_{}", tau_bin_label(i)),
        }
    }

    fn index(self, r: &FitRecord) -> usize {
        match self {
            Axis::Tau => tau_bin(r.tau_emp),
            Axis::Skew => skew_bin(r.skew_emp),
        }
    }

    fn other_index(self, r: &FitRecord) -> usize {
        match self {
            Axis::Tau => skew_bin(r.skew_emp),
            Axis::Skew => tau_bin(r.tau_emp),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub model: String,
    pub bin: usize,
    pub count: usize,
    /// Mean relative bias of μ̂₁ split by the other axis's bins.
    pub bias_mu1_by_other: Vec<Option<f64>>,
    pub bias_mu1: Option<f64>,
    pub bias_mu2: Option<f64>,
    pub bias_beta_t: Option<f64>,
    pub mean_se_beta1: Option<f64>,
    pub sd_beta1: Option<f64>,
    pub mean_se_beta_t: Option<f64>,
    pub mean_tau_emp: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Bin successful records on the chosen axis, Table-1/2 shaped: rows are
/// (model, bin) pairs, the μ₁ bias additionally split by the other axis.
pub fn aggregate_report(records: &[FitRecord], axis: Axis) -> Vec<SummaryRow> {
    let mut models: Vec<String> = records.iter().map(|r| r.model.clone()).collect();
    models.sort();
    models.dedup();

    let mut rows = Vec::new();
    for model in &models {
        for bin in 0..axis.bins() {
            let in_bin: Vec<&FitRecord> = records
                .iter()
                .filter(|r| r.model == *model && r.is_ok() && axis.index(r) == bin)
                .collect();
            let count = in_bin.len();
            let collect = |f: &dyn Fn(&FitRecord) -> f64| -> Vec<f64> {
                in_bin
                    .iter()
                    .map(|r| f(r))
                    .filter(|v| v.is_finite())
                    .collect()
            };
            let mut by_other = Vec::new();
            for ob in 0..axis.other_bins() {
                let vals: Vec<f64> = in_bin
                    .iter()
                    .filter(|r| axis.other_index(r) == ob)
                    .map(|r| r.rel_bias_mu1())
                    .filter(|v| v.is_finite())
                    .collect();
                by_other.push(mean(&vals));
            }
            // within-cell SD of beta1 across replicates, averaged over cells
            let mut per_cell: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for r in &in_bin {
                if r.beta1.is_finite() {
                    per_cell.entry(r.cell_index).or_default().push(r.beta1);
                }
            }
            let sds: Vec<f64> = per_cell
                .values()
                .filter(|v| v.len() >= 2)
                .map(|v| {
                    let m = v.iter().sum::<f64>() / v.len() as f64;
                    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0))
                        .sqrt()
                })
                .collect();

            rows.push(SummaryRow {
                model: model.clone(),
                bin,
                count,
                bias_mu1_by_other: by_other,
                bias_mu1: mean(&collect(&|r| r.rel_bias_mu1())),
                bias_mu2: mean(&collect(&|r| r.rel_bias_mu2())),
                bias_beta_t: mean(&collect(&|r| {
                    let truth = r.beta_t_true();
                    if truth.abs() > 1e-12 {
                        r.beta_t / truth - 1.0
                    } else {
                        f64::NAN
                    }
                })),
                mean_se_beta1: mean(&collect(&|r| r.se_beta1)),
                sd_beta1: mean(&sds),
                mean_se_beta_t: mean(&collect(&|r| r.se_beta_t)),
                mean_tau_emp: mean(&collect(&|r| r.tau_emp)),
            });
        }
    }
    rows
}

/// Mean relative bias of μ̂₁ for one model over the (tau, skew) grid, with
/// per-cell record counts — the two-way table behind the paper-style checks.
pub fn two_way_bias(
    records: &[FitRecord],
    model: &str,
) -> [[(Option<f64>, usize); SKEW_BINS]; TAU_BINS] {
    let mut sums = [[0.0; SKEW_BINS]; TAU_BINS];
    let mut counts = [[0usize; SKEW_BINS]; TAU_BINS];
    for r in records {
        if r.model != model || !r.is_ok() {
            continue;
        }
        let b = r.rel_bias_mu1();
        if !b.is_finite() {
            continue;
        }
        let (i, j) = (tau_bin(r.tau_emp), skew_bin(r.skew_emp));
        sums[i][j] += b;
        counts[i][j] += 1;
    }
    let mut out = [[(None, 0usize); SKEW_BINS]; TAU_BINS];
    for i in 0..TAU_BINS {
        for j in 0..SKEW_BINS {
            if counts[i][j] > 0 {
                out[i][j] = (Some(sums[i][j] / counts[i][j] as f64), counts[i][j]);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SelectionSummaryRow {
    pub model: String,
    pub bin: usize,
    pub count: usize,
    pub mean_loglik: Option<f64>,
    pub mean_aic: Option<f64>,
    pub mean_gaic4: Option<f64>,
    pub mean_bic: Option<f64>,
    pub mean_edf: Option<f64>,
    pub bic_win_share: Option<f64>,
}

/// Cell-level BIC winners: the model with the lowest replicate-mean BIC in
/// each cell (cells without any BIC-carrying fits are skipped).
pub fn bic_winners_per_cell(records: &[FitRecord]) -> BTreeMap<usize, String> {
    let mut by_cell: BTreeMap<usize, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for r in records {
        if let Some(bic) = r.bic {
            if r.is_ok() {
                by_cell
                    .entry(r.cell_index)
                    .or_default()
                    .entry(r.model.clone())
                    .or_default()
                    .push(bic);
            }
        }
    }
    by_cell
        .into_iter()
        .filter_map(|(cell, models)| {
            models
                .into_iter()
                .map(|(m, bics)| {
                    let mean = bics.iter().sum::<f64>() / bics.len() as f64;
                    (m, mean)
                })
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .map(|(m, _)| (cell, m))
        })
        .collect()
}

pub fn selection_summary(records: &[FitRecord]) -> Vec<SelectionSummaryRow> {
    let winners = bic_winners_per_cell(records);
    let mut models: Vec<String> = records.iter().map(|r| r.model.clone()).collect();
    models.sort();
    models.dedup();
    let mut rows = Vec::new();
    for model in &models {
        for bin in 0..TAU_BINS {
            let in_bin: Vec<&FitRecord> = records
                .iter()
                .filter(|r| r.model == *model && r.is_ok() && tau_bin(r.tau_emp) == bin)
                .collect();
            let count = in_bin.len();
            let collect = |f: &dyn Fn(&FitRecord) -> Option<f64>| -> Vec<f64> {
                in_bin.iter().filter_map(|r| f(r)).collect()
            };
            // share of cells (whose records fall in this bin) won by `model`
            let mut cells: Vec<usize> = in_bin.iter().map(|r| r.cell_index).collect();
            cells.sort_unstable();
            cells.dedup();
            let decided: Vec<&usize> = cells.iter().filter(|c| winners.contains_key(c)).collect();
            let win_share = if decided.is_empty() {
                None
            } else {
                Some(
                    decided
                        .iter()
                        .filter(|c| winners.get(**c) == Some(model))
                        .count() as f64
                        / decided.len() as f64,
                )
            };
            rows.push(SelectionSummaryRow {
                model: model.clone(),
                bin,
                count,
                mean_loglik: mean(&collect(&|r| r.loglik)),
                mean_aic: mean(&collect(&|r| r.aic)),
                mean_gaic4: mean(&collect(&|r| r.gaic4)),
                mean_bic: mean(&collect(&|r| r.bic)),
                mean_edf: mean(&collect(&|r| r.edf.is_finite().then_some(r.edf))),
                bic_win_share: win_share,
            });
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// CSV serialization
// ---------------------------------------------------------------------------

const RECORD_COLUMNS: &str = "generator,cell_index,replicate,model,n,mu1_true,mu2_true,sigma1_true,sigma2_true,dep_true,tau_true,skew_true,tau_emp,skew_emp,status,converged,iterations,mu1_hat,mu2_hat,beta1,beta2,beta_t,se_beta1,se_beta2,se_beta_t,dependence_hat,loglik,edf,aic,gaic4,bic,clipped,re_boundary,hessian_repaired";

pub fn write_records_csv(report: &ScenarioReport, path: &Path) -> Result<()> {
    let mut w = create_file(path)?;
    write_header(
        &mut w,
        Some(report.seed),
        &[
            ("generator", report.generator.name().to_string()),
            ("n", report.n.to_string()),
            ("replicates", report.replicates.to_string()),
        ],
    )?;
    writeln!(w, "{RECORD_COLUMNS}")?;
    for r in &report.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.generator.name(),
            r.cell_index,
            r.replicate,
            r.model,
            r.n,
            fmt_f64(r.mu1_true),
            fmt_f64(r.mu2_true),
            fmt_f64(r.sigma1_true),
            fmt_f64(r.sigma2_true),
            fmt_f64(r.dep_true),
            fmt_f64(r.tau_true),
            fmt_f64(r.skew_true),
            fmt_f64(r.tau_emp),
            fmt_f64(r.skew_emp),
            r.status,
            r.converged,
            r.iterations,
            fmt_f64(r.mu1_hat),
            fmt_f64(r.mu2_hat),
            fmt_f64(r.beta1),
            fmt_f64(r.beta2),
            fmt_f64(r.beta_t),
            fmt_f64(r.se_beta1),
            fmt_f64(r.se_beta2),
            fmt_f64(r.se_beta_t),
            fmt_f64(r.dependence_hat),
            fmt_opt(r.loglik),
            fmt_f64(r.edf),
            fmt_opt(r.aic),
            fmt_opt(r.gaic4),
            fmt_opt(r.bic),
            r.clipped,
            r.re_boundary,
            r.hessian_repaired,
        )?;
    }
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<FitRecord>> {
    let lines = read_lines(path)?;
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, line) in lines.iter().enumerate() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != RECORD_COLUMNS {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "unexpected records.csv column header".into(),
                });
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 34 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 34 fields, got {}", f.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad {what}: '{s}'"),
            })
        };
        records.push(FitRecord {
            generator: GeneratorKind::parse(f[0])?,
            cell_index: parse_usize(f[1], "cell_index")?,
            replicate: parse_usize(f[2], "replicate")?,
            model: f[3].to_string(),
            n: parse_usize(f[4], "n")?,
            mu1_true: parse_f64(f[5]),
            mu2_true: parse_f64(f[6]),
            sigma1_true: parse_f64(f[7]),
            sigma2_true: parse_f64(f[8]),
            dep_true: parse_f64(f[9]),
            tau_true: parse_f64(f[10]),
            skew_true: parse_f64(f[11]),
            tau_emp: parse_f64(f[12]),
            skew_emp: parse_f64(f[13]),
            status: f[14].to_string(),
            converged: f[15] == "true",
            iterations: parse_usize(f[16], "iterations")?,
            mu1_hat: parse_f64(f[17]),
            mu2_hat: parse_f64(f[18]),
            beta1: parse_f64(f[19]),
            beta2: parse_f64(f[20]),
            beta_t: parse_f64(f[21]),
            se_beta1: parse_f64(f[22]),
            se_beta2: parse_f64(f[23]),
            se_beta_t: parse_f64(f[24]),
            dependence_hat: parse_f64(f[25]),
            loglik: parse_opt(f[26]),
            edf: parse_f64(f[27]),
            aic: parse_opt(f[28]),
            gaic4: parse_opt(f[29]),
            bic: parse_opt(f[30]),
            clipped: parse_usize(f[31], "clipped")?,
            re_boundary: f[32] == "true",
            hessian_repaired: f[33] == "true",
        });
    }
    Ok(records)
}

pub fn write_summary_csv(
    rows: &[SummaryRow],
    axis: Axis,
    seed: Option<u64>,
    path: &Path,
) -> Result<()> {
    let mut w = create_file(path)?;
    write_header(&mut w, seed, &[("axis", format!("{axis:?}").to_lowercase())])?;
    let other_cols: Vec<String> = (0..axis.other_bins())
        .map(|i| format!("bias_mu1_{}", axis.other_label(i)))
        .collect();
    writeln!(
        w,
        "model,bin,count,{},bias_mu1,bias_mu2,bias_beta_t,mean_se_beta1,sd_beta1,mean_se_beta_t,mean_tau_emp",
        other_cols.join(",")
    )?;
    for r in rows {
        let by_other: Vec<String> = r
            .bias_mu1_by_other
            .iter()
            .map(|v| fmt_opt(*v))
            .collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.model,
            axis.label(r.bin),
            r.count,
            by_other.join(","),
            fmt_opt(r.bias_mu1),
            fmt_opt(r.bias_mu2),
            fmt_opt(r.bias_beta_t),
            fmt_opt(r.mean_se_beta1),
            fmt_opt(r.sd_beta1),
            fmt_opt(r.mean_se_beta_t),
            fmt_opt(r.mean_tau_emp),
        )?;
    }
    Ok(())
}

pub fn write_selection_csv(
    rows: &[SelectionSummaryRow],
    seed: Option<u64>,
    path: &Path,
) -> Result<()> {
    let mut w = create_file(path)?;
    write_header(&mut w, seed, &[])?;
    writeln!(
        w,
        "model,bin,count,mean_loglik,mean_aic,mean_gaic4,mean_bic,mean_edf,bic_win_share"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.model,
            tau_bin_label(r.bin),
            r.count,
            fmt_opt(r.mean_loglik),
            fmt_opt(r.mean_aic),
            fmt_opt(r.mean_gaic4),
            fmt_opt(r.mean_bic),
            fmt_opt(r.mean_edf),
            fmt_opt(r.bic_win_share),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(model: &str, tau: f64, skew: f64, bias: f64, cell: usize, bic: Option<f64>) -> FitRecord {
        FitRecord {
            generator: GeneratorKind::Gamma,
            cell_index: cell,
            replicate: 0,
            model: model.into(),
            n: 100,
            mu1_true: 2.0,
            mu2_true: 2.4,
            sigma1_true: 0.8,
            sigma2_true: 0.8,
            dep_true: 1.0,
            tau_true: tau,
            skew_true: skew,
            tau_emp: tau,
            skew_emp: skew,
            status: "ok".into(),
            converged: true,
            iterations: 10,
            mu1_hat: 2.0 * (1.0 + bias),
            mu2_hat: 2.4,
            beta1: (2.0 * (1.0 + bias)).ln(),
            beta2: 2.4_f64.ln(),
            beta_t: (2.4_f64 / 2.0).ln(),
            se_beta1: 0.05,
            se_beta2: 0.05,
            se_beta_t: 0.07,
            dependence_hat: 1.0,
            loglik: Some(-100.0),
            edf: 5.0,
            aic: Some(210.0),
            gaic4: Some(220.0),
            bic: bic,
            clipped: 0,
            re_boundary: false,
            hessian_repaired: false,
        }
    }

    #[test]
    fn binning_boundaries() {
        assert_eq!(tau_bin(0.0), 0);
        assert_eq!(tau_bin(0.19), 0);
        assert_eq!(tau_bin(0.2), 1);
        assert_eq!(tau_bin(0.95), 4);
        assert_eq!(tau_bin(-0.1), 0);
        assert_eq!(skew_bin(1.5), 1);
        assert_eq!(skew_bin(7.3), 5);
    }

    #[test]
    fn aggregate_means_and_empty_bins() {
        let records = vec![
            record("glmm", 0.1, 1.5, -0.10, 0, Some(300.0)),
            record("glmm", 0.15, 1.6, -0.12, 0, Some(300.0)),
            record("glmm", 0.55, 2.5, -0.50, 1, Some(310.0)),
        ];
        let rows = aggregate_report(&records, Axis::Tau);
        let bin0 = rows.iter().find(|r| r.bin == 0).unwrap();
        assert_eq!(bin0.count, 2);
        assert!((bin0.bias_mu1.unwrap() + 0.11).abs() < 1e-12);
        // skew column 1-2 carries the data, others are empty
        assert!(bin0.bias_mu1_by_other[1].is_some());
        assert!(bin0.bias_mu1_by_other[3].is_none());
        let bin1 = rows.iter().find(|r| r.bin == 1).unwrap();
        assert_eq!(bin1.count, 0);
        assert!(bin1.bias_mu1.is_none());
        // beta_t here is exactly true: relative bias 0
        assert!(bin0.bias_beta_t.unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_way_table_routes_cells() {
        let records = vec![
            record("glmm", 0.1, 1.5, -0.10, 0, None),
            record("glmm", 0.7, 2.5, -0.69, 1, None),
        ];
        let table = two_way_bias(&records, "glmm");
        assert!((table[0][1].0.unwrap() + 0.10).abs() < 1e-12);
        assert_eq!(table[0][1].1, 1);
        assert!((table[3][2].0.unwrap() + 0.69).abs() < 1e-12);
        assert!(table[2][2].0.is_none());
    }

    #[test]
    fn bic_winner_counting() {
        let records = vec![
            record("glmm", 0.1, 1.5, -0.1, 0, Some(320.0)),
            record("gjrm_clayton", 0.1, 1.5, 0.0, 0, Some(300.0)),
            record("glmm", 0.5, 1.5, -0.3, 1, Some(280.0)),
            record("gjrm_clayton", 0.5, 1.5, 0.0, 1, Some(290.0)),
        ];
        let winners = bic_winners_per_cell(&records);
        assert_eq!(winners[&0], "gjrm_clayton");
        assert_eq!(winners[&1], "glmm");
        let summary = selection_summary(&records);
        let clayton_bin0 = summary
            .iter()
            .find(|r| r.model == "gjrm_clayton" && r.bin == 0)
            .unwrap();
        assert_eq!(clayton_bin0.bic_win_share, Some(1.0));
    }

    #[test]
    fn records_round_trip_through_csv() {
        let report = ScenarioReport {
            generator: GeneratorKind::Gamma,
            n: 100,
            replicates: 1,
            seed: 9,
            records: vec![
                record("glm", 0.3, 1.2, 0.01, 0, Some(250.0)),
                {
                    let mut r = record("gee", 0.3, 1.2, 0.0, 0, None);
                    r.status = "convergence failure: test".into();
                    r.mu1_hat = f64::NAN;
                    r.loglik = None;
                    r
                },
            ],
        };
        let dir = std::env::temp_dir().join("jointreg_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("records.csv");
        write_records_csv(&report, &path).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].model, "glm");
        assert_eq!(back[0].bic, Some(250.0));
        assert!((back[0].beta1 - report.records[0].beta1).abs() < 1e-15);
        assert!(!back[1].is_ok());
        assert!(back[1].mu1_hat.is_nan());
        // aggregation from re-read records matches in-memory aggregation
        let a = aggregate_report(&report.records, Axis::Tau);
        let b = aggregate_report(&back, Axis::Tau);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.count, y.count);
            assert_eq!(x.bias_mu1, y.bias_mu1);
        }
    }
}
