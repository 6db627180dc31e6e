//! Experiment configuration files.
//!
//! A config is TOML text with an optional `name`, a `[model]` table and a
//! `[params]` table whose fields depend on the scenario:
//!
//! ```toml
//! name = "stable-1.5"
//!
//! [model]
//! kind = "stable"
//! alpha = 1.5
//! rho = 0.5
//!
//! [params]
//! z_grid = [-0.5, 0.0, 0.5]
//! chi_tol = 1e-8
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use ssmp_core::map::{ChainConfig, JumpLaw, LevyComponent, MapConfig, MapSpec};
use ssmp_core::renewal::MarwSpec;
use ssmp_core::stable::StableParams;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig<P> {
    /// label used as `spec_id` in reports
    pub name: Option<String>,
    pub model: ModelConfig,
    pub params: P,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Stable {
        alpha: f64,
        rho: f64,
    },
    /// MAP given inline (`[model.chain]`, `[model.component.i]`,
    /// `[model.switch.i.j]`) or through `file`, relative to the config
    Map {
        file: Option<String>,
        chain: Option<ChainConfig>,
        component: Option<BTreeMap<String, LevyComponent>>,
        switch: Option<BTreeMap<String, BTreeMap<String, JumpLaw>>>,
    },
    /// Markov additive random walk: transition matrix and one increment law
    /// per transition
    Marw {
        p: Vec<Vec<f64>>,
        laws: Vec<Vec<JumpLaw>>,
    },
}

/// A model ready for the library.
#[derive(Debug, Clone)]
pub enum Model {
    Stable(StableParams),
    Map(MapSpec),
    Marw(MarwSpec),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Stable(_) => "stable",
            Model::Map(_) => "map",
            Model::Marw(_) => "marw",
        }
    }
}

/// Raw config text, its hash and the directory used to resolve `file`.
pub struct ConfigSource {
    pub text: String,
    pub sha256: String,
    pub dir: std::path::PathBuf,
    pub path: String,
}

impl ConfigSource {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(ConfigSource { text, sha256, dir, path: path.display().to_string() })
    }

    pub fn parse<P: DeserializeOwned>(&self) -> Result<ExperimentConfig<P>, CliError> {
        toml::from_str(&self.text).map_err(|e| CliError::Config(format!("{}: {e}", self.path)))
    }

    pub fn model(&self, cfg: &ModelConfig) -> Result<Model, CliError> {
        let bad = |e: ssmp_core::Error| CliError::Config(format!("{}: [model]: {e}", self.path));
        match cfg {
            ModelConfig::Stable { alpha, rho } => Ok(Model::Stable(StableParams::new(*alpha, *rho).map_err(bad)?)),
            ModelConfig::Map { file: Some(file), chain: None, component: None, switch: None } => {
                let path = self.dir.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                let spec = MapSpec::from_toml(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Ok(Model::Map(spec))
            }
            ModelConfig::Map { file: None, chain: Some(chain), component: Some(component), switch } => {
                let map = MapConfig {
                    chain: chain.clone(),
                    component: component.clone(),
                    switch: switch.clone().unwrap_or_default(),
                };
                Ok(Model::Map(map.into_spec().map_err(bad)?))
            }
            ModelConfig::Map { .. } => Err(CliError::Config(format!(
                "{}: [model] with kind = \"map\" needs either `file` or inline `chain` and `component` tables",
                self.path
            ))),
            ModelConfig::Marw { p, laws } => {
                let n = p.len();
                if p.iter().any(|row| row.len() != n) {
                    return Err(CliError::Config(format!("{}: [model].p must be square", self.path)));
                }
                let flat: Vec<f64> = p.iter().flatten().copied().collect();
                let m = DMatrix::from_row_slice(n, n, &flat);
                Ok(Model::Marw(MarwSpec::new(m, laws.clone()).map_err(bad)?))
            }
        }
    }
}
