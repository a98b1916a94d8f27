//! Shared CSV formatting and the output schema sheet.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Build identifier baked in at compile time.
pub fn build_id() -> &'static str {
    option_env!("JOINTREG_GIT_HASH").unwrap_or("untracked")
}

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Standard comment header: version, seed and build id, plus free-form
/// key=value pairs. Contains nothing run-dependent beyond the seed, so
/// outputs stay byte-reproducible.
pub fn write_header(w: &mut impl Write, seed: Option<u64>, extra: &[(&str, String)]) -> Result<()> {
    write!(w, "# jointreg v{} build={}", version(), build_id())?;
    if let Some(s) = seed {
        write!(w, " seed={s}")?;
    }
    for (k, v) in extra {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)?;
    writeln!(
        w,
        "# bias columns are relative: estimate/truth - 1; empty cells mean no data"
    )?;
    Ok(())
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

pub fn parse_f64(s: &str) -> f64 {
    if s.is_empty() {
        f64::NAN
    } else {
        s.parse().unwrap_or(f64::NAN)
    }
}

pub fn parse_opt(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

pub fn create_file(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.lines().map(String::from).collect())
}

/// Column documentation shipped next to every output directory.
pub const SCHEMA: &str = "\
jointreg output schema
======================

records.csv — one row per (cell, replicate, model) fit
  generator        data-generating process: normal | negbin | gamma
  cell_index       0-based index into the grid's canonical cell order
  replicate        0-based replicate index within the cell
  model            glm | gee | glmm | gjrm_<copula>
  n                subjects per time point
  mu1_true..mu2_true       true marginal means
  sigma1_true..sigma2_true true GAMLSS dispersions
  dep_true         generator dependence parameter (rho / sigma / theta)
  tau_true         population Kendall tau (closed form or seeded MC)
  skew_true        average true marginal skewness
  tau_emp          sample Kendall tau-b of the replicate
  skew_emp         average sample skewness of the replicate margins
  status           ok, or the failure reason (fits never vanish silently)
  converged        optimizer convergence flag
  iterations       optimizer iterations
  mu1_hat, mu2_hat estimated marginal means (inverse-link scale)
  beta1, beta2     estimated mean coefficients (link scale)
  beta_t           beta2 - beta1 with its delta-method SE (se_beta_t)
  se_beta1, se_beta2, se_beta_t  reported standard errors
  dependence_hat   estimated dependence (rho / copula theta / RE sd)
  loglik, edf, aic, gaic4, bic   fit criteria (blank when undefined: GEE)
  clipped          PIT values clipped at the copula boundary
  re_boundary      GLMM random-effect SD collapsed to zero
  hessian_repaired observed information needed an eigenvalue floor
  (wall-clock time is intentionally absent: records are byte-reproducible;
   timings are in bench.csv)

summary_tau.csv / summary_skew.csv — binned aggregation of records.csv
  model            fitted model tag
  bin              primary-axis bin label (tau in width-0.2 bins, or unit
                   skewness bins)
  count            records aggregated in the row
  bias_mu1_<skew/tau bin>  mean relative bias of mu1_hat, split by the other
                   axis's bins (empty when the cross-bin holds no records)
  bias_mu1, bias_mu2       overall mean relative bias in the row's bin
  bias_beta_t      mean relative bias of beta_t
  mean_se_beta1    mean reported SE of beta1
  sd_beta1         mean within-cell SD of beta1 across replicates
  mean_se_beta_t   mean reported SE of beta_t
  mean_tau_emp     mean sample tau in the bin

selection.csv — model-selection averages per (model, tau bin)
  model, bin, count          as above
  mean_loglik, mean_aic, mean_gaic4, mean_bic, mean_edf
  bic_win_share    share of cells in the bin whose replicate-mean BIC is
                   lowest for this model (blank for GEE: no likelihood)

bench.csv — wall-clock timings
  model, n, repeat, wall_ms  one timed fit per row
  (header embeds the hardware description)

application.csv — one row per model fitted to a data file
  model, status, mu1_hat, mu2_hat, beta1, beta2, beta_t,
  se_beta1, se_beta2, se_beta_t, loglik, aic, gaic4, bic, edf,
  best_loglik, best_aic, best_gaic4, best_bic   rank flags: 1 best, 2 second
";

pub fn write_schema(dir: &Path) -> Result<()> {
    let mut f = create_file(&dir.join("schema.txt"))?;
    f.write_all(SCHEMA.as_bytes())?;
    Ok(())
}
