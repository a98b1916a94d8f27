//! Simulation grids: the three parameter lattices with their paper defaults,
//! desk-scale thinning, and the model menus fitted per cell.

use crate::copulas::CopulaFamily;
use crate::distributions::{LinkFunction, ResponseFamily, TrueScenario};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Normal,
    NegBin,
    Gamma,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Normal => "normal",
            GeneratorKind::NegBin => "negbin",
            GeneratorKind::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(GeneratorKind::Normal),
            "negbin" | "nb" => Ok(GeneratorKind::NegBin),
            "gamma" => Ok(GeneratorKind::Gamma),
            other => Err(Error::config(format!("unknown generator '{other}'"))),
        }
    }

    pub fn family(self) -> ResponseFamily {
        match self {
            GeneratorKind::Normal => ResponseFamily::Normal,
            GeneratorKind::NegBin => ResponseFamily::NegBin,
            GeneratorKind::Gamma => ResponseFamily::Gamma,
        }
    }

    pub fn link(self) -> LinkFunction {
        self.family().default_link()
    }
}

/// One entry of the fitted-model menu.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Glm,
    Gee,
    Glmm,
    Gjrm(CopulaFamily),
}

impl ModelKind {
    pub fn name(self) -> String {
        match self {
            ModelKind::Glm => "glm".into(),
            ModelKind::Gee => "gee".into(),
            ModelKind::Glmm => "glmm".into(),
            ModelKind::Gjrm(c) => format!("gjrm_{}", c.name()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "glm" => Ok(ModelKind::Glm),
            "gee" => Ok(ModelKind::Gee),
            "glmm" => Ok(ModelKind::Glmm),
            other => {
                if let Some(cop) = other.strip_prefix("gjrm_").or_else(|| other.strip_prefix("gjrm-"))
                {
                    Ok(ModelKind::Gjrm(CopulaFamily::parse(cop)?))
                } else {
                    Err(Error::config(format!("unknown model '{other}'")))
                }
            }
        }
    }
}

/// The default menu fitted on every grid: the two reference GJRMs of the
/// simulation figures plus the three univariate-based models.
pub fn default_models() -> Vec<ModelKind> {
    vec![
        ModelKind::Glm,
        ModelKind::Gee,
        ModelKind::Glmm,
        ModelKind::Gjrm(CopulaFamily::Clayton),
        ModelKind::Gjrm(CopulaFamily::Gaussian),
    ]
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub generator: GeneratorKind,
    pub cells: Vec<TrueScenario>,
    pub n_per_timepoint: usize,
    pub replicates_per_cell: usize,
    pub models: Vec<ModelKind>,
    pub seed: u64,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::config("grid has no cells"));
        }
        if self.replicates_per_cell == 0 {
            return Err(Error::config("replicates_per_cell must be at least 1"));
        }
        if self.models.is_empty() {
            return Err(Error::config("no models requested"));
        }
        if self.n_per_timepoint < 10 {
            return Err(Error::config("n_per_timepoint must be at least 10"));
        }
        for c in &self.cells {
            c.validate()?;
        }
        Ok(())
    }

    /// Bivariate normal lattice: fixed means (1, 2), five equally spaced
    /// values for each marginal SD on [0.25, 2.5] and nine correlations on
    /// [0.1, 0.9] — 225 cells.
    pub fn paper_normal(desk: bool, seed: u64) -> Self {
        let sds: Vec<f64> = (0..5).map(|i| 0.25 + i as f64 * (2.5 - 0.25) / 4.0).collect();
        let rhos: Vec<f64> = (0..9).map(|i| 0.1 + i as f64 * 0.1).collect();
        let mut cells = Vec::new();
        for &sigma1 in &sds {
            for &sigma2 in &sds {
                for &rho in &rhos {
                    cells.push(TrueScenario::BivNormal {
                        mu1: 1.0,
                        mu2: 2.0,
                        sigma1,
                        sigma2,
                        rho,
                    });
                }
            }
        }
        Self::assemble(GeneratorKind::Normal, cells, desk, seed)
    }

    /// Compound-Poisson negative binomial lattice: exposures t₁, t₂ over four
    /// values of [0.2, 5] and mixing (θ, k) over five values each — 400 cells.
    pub fn paper_negbin(desk: bool, seed: u64) -> Self {
        let ts: Vec<f64> = (0..4).map(|i| 0.2 + i as f64 * (5.0 - 0.2) / 3.0).collect();
        let mix: Vec<f64> = (0..5).map(|i| 0.2 + i as f64 * (5.0 - 0.2) / 4.0).collect();
        let mut cells = Vec::new();
        for &t1 in &ts {
            for &t2 in &ts {
                for &theta_mix in &mix {
                    for &k in &mix {
                        cells.push(TrueScenario::BivNegBin { t1, t2, theta_mix, k });
                    }
                }
            }
        }
        Self::assemble(GeneratorKind::NegBin, cells, desk, seed)
    }

    /// Bivariate gamma lattice: σ² and θ step through 0.2..2.1 by 0.1, with
    /// μ₁ = 2..21 tied to the σ index and μ₂ = 1.2 μ₁ — 400 cells.
    pub fn paper_gamma(desk: bool, seed: u64) -> Self {
        let mut cells = Vec::new();
        for i in 0..20 {
            let sigma = (0.2 + 0.1 * i as f64).sqrt();
            let mu1 = 2.0 + i as f64;
            for j in 0..20 {
                let theta = 0.2 + 0.1 * j as f64;
                cells.push(TrueScenario::BivGamma {
                    mu1,
                    mu2: 1.2 * mu1,
                    sigma,
                    theta,
                });
            }
        }
        Self::assemble(GeneratorKind::Gamma, cells, desk, seed)
    }

    pub fn paper_grid(generator: GeneratorKind, desk: bool, seed: u64) -> Self {
        match generator {
            GeneratorKind::Normal => Self::paper_normal(desk, seed),
            GeneratorKind::NegBin => Self::paper_negbin(desk, seed),
            GeneratorKind::Gamma => Self::paper_gamma(desk, seed),
        }
    }

    fn assemble(generator: GeneratorKind, cells: Vec<TrueScenario>, desk: bool, seed: u64) -> Self {
        let cells = if desk {
            // desk scale: every 4th cell of the canonical enumeration
            cells.into_iter().step_by(4).collect()
        } else {
            cells
        };
        Self {
            generator,
            cells,
            n_per_timepoint: 1000,
            replicates_per_cell: 25,
            models: default_models(),
            seed,
        }
    }

    /// A grid over explicit scenario cells (calibration studies, tests).
    pub fn custom(
        generator: GeneratorKind,
        cells: Vec<TrueScenario>,
        n: usize,
        replicates: usize,
        models: Vec<ModelKind>,
        seed: u64,
    ) -> Self {
        Self {
            generator,
            cells,
            n_per_timepoint: n,
            replicates_per_cell: replicates,
            models,
            seed,
        }
    }
}
