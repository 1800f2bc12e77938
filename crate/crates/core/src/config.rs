// SPDX-License-Identifier: Apache-2.0

//! JSON configuration shared by the service, the CLI and the simulator.
//!
//! The bundled `config/default.json` is the single source of default values;
//! `Config::default()` parses it at runtime.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::budget::Thresholds;
use crate::error::ConfigError;
use crate::farm::GameConfig;
use crate::footprint::{DatacenterProfile, ModelProfile};
use crate::provider::ProviderConfig;
use crate::relatable::RelatableConstants;

pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub cors_origin: String,
    /// Write a state snapshot after this many log records.
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub model: ModelProfile,
    pub datacenter: DatacenterProfile,
    pub relatable: RelatableConstants,
    pub budget: Thresholds,
    pub provider: ProviderConfig,
    pub service: ServiceConfig,
    pub game: GameConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self::from_json(DEFAULT_CONFIG_JSON).expect("bundled default config is valid")
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Config = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Loads `path` when given, the bundled defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate()?;
        self.datacenter.validate()?;
        self.relatable.validate()?;
        self.budget.validate()?;
        self.provider.validate()?;
        if self.service.snapshot_every == 0 {
            return Err(ConfigError::Invalid(
                "service.snapshot_every must be > 0".into(),
            ));
        }
        self.game.validate()?;
        Ok(())
    }
}
