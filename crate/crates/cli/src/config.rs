use std::fs;
use std::path::Path;

use amods::adaptive::{RunConfig, DEFAULT_GRID_C, DEFAULT_GRID_GAMMA};
use amods::corpus::CorpusConfig;
use amods::ingest::CleanConfig;
use anyhow::Context;
use serde::{Deserialize, Serialize};

/// Everything tunable from one JSON file. Missing keys take their defaults;
/// `amods config` prints the full default document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub ingest: CleanConfig,
    pub corpus: CorpusConfig,
    pub run: RunConfig,
    pub grid_search: GridSearch,
    pub service: ServiceConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSearch {
    /// Replace the meta `(C, gamma)` with a grid-search pick on the initial set.
    pub enabled: bool,
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch { enabled: false, c: DEFAULT_GRID_C.to_vec(), gamma: DEFAULT_GRID_GAMMA.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    /// How long `POST /api/advance` waits for retraining before answering 503.
    pub advance_timeout_secs: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { host: "127.0.0.1".into(), port: 8080, advance_timeout_secs: 600 }
    }
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(CliConfig::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: CliConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.run.validate()?;
        config.corpus.validate()?;
        Ok(config)
    }
}
