//! TOML configuration mirroring the experiment-grid fields; CLI flags
//! override file values, which override the built-in defaults.

use super::grid::{default_models, ExperimentGrid, GeneratorKind, ModelKind};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// normal | negbin | gamma | all
    pub grid: Option<String>,
    /// Desk scale (every 4th cell) instead of the full lattice.
    pub desk: Option<bool>,
    pub replicates: Option<usize>,
    pub n_per_timepoint: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Model tags: glm, gee, glmm, gjrm_<copula>.
    pub models: Option<Vec<String>>,
    pub out: Option<String>,
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("bad config: {e}")))
    }

    /// Merge: `other`'s set fields win.
    pub fn overridden_by(mut self, other: &SimConfig) -> Self {
        if other.grid.is_some() {
            self.grid = other.grid.clone();
        }
        if other.desk.is_some() {
            self.desk = other.desk;
        }
        if other.replicates.is_some() {
            self.replicates = other.replicates;
        }
        if other.n_per_timepoint.is_some() {
            self.n_per_timepoint = other.n_per_timepoint;
        }
        if other.seed.is_some() {
            self.seed = other.seed;
        }
        if other.workers.is_some() {
            self.workers = other.workers;
        }
        if other.models.is_some() {
            self.models = other.models.clone();
        }
        if other.out.is_some() {
            self.out = other.out.clone();
        }
        self
    }

    pub fn generators(&self) -> Result<Vec<GeneratorKind>> {
        match self.grid.as_deref().unwrap_or("all") {
            "all" => Ok(vec![
                GeneratorKind::Normal,
                GeneratorKind::NegBin,
                GeneratorKind::Gamma,
            ]),
            one => Ok(vec![GeneratorKind::parse(one)?]),
        }
    }

    pub fn models(&self) -> Result<Vec<ModelKind>> {
        match &self.models {
            None => Ok(default_models()),
            Some(list) => list.iter().map(|s| ModelKind::parse(s)).collect(),
        }
    }

    /// Materialize one generator's grid under this configuration.
    pub fn grid_for(&self, generator: GeneratorKind) -> Result<ExperimentGrid> {
        let desk = self.desk.unwrap_or(true);
        let seed = self.seed.unwrap_or(42);
        let mut grid = ExperimentGrid::paper_grid(generator, desk, seed);
        if let Some(r) = self.replicates {
            grid.replicates_per_cell = r;
        }
        if let Some(n) = self.n_per_timepoint {
            grid.n_per_timepoint = n;
        }
        grid.models = self.models()?;
        grid.validate()?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parse_and_merge() {
        let dir = std::env::temp_dir().join("jointreg_config_tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(
            f,
            "grid = \"gamma\"\nreplicates = 5\nseed = 7\nmodels = [\"glm\", \"gjrm_clayton\"]"
        )
        .unwrap();
        let cfg = SimConfig::load(&path).unwrap();
        assert_eq!(cfg.generators().unwrap(), vec![GeneratorKind::Gamma]);
        assert_eq!(cfg.models().unwrap().len(), 2);
        let cli = SimConfig {
            seed: Some(99),
            ..Default::default()
        };
        let merged = cfg.overridden_by(&cli);
        assert_eq!(merged.seed, Some(99));
        assert_eq!(merged.replicates, Some(5));
        let grid = merged.grid_for(GeneratorKind::Gamma).unwrap();
        assert_eq!(grid.replicates_per_cell, 5);
        assert_eq!(grid.seed, 99);
        assert_eq!(grid.cells.len(), 100);
    }

    #[test]
    fn unknown_fields_rejected() {
        let dir = std::env::temp_dir().join("jointreg_config_tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.toml");
        std::fs::write(&path, "gird = \"gamma\"\n").unwrap();
        assert!(SimConfig::load(&path).is_err());
    }
}
