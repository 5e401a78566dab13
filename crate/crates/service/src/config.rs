//! Service configuration: a TOML file, then `TRIAD_*` environment
//! overrides, then command-line flags.
//!
//! Top-level keys map to `TRIAD_<KEY>`; nested pipeline keys use double
//! underscores, e.g. `TRIAD_PIPELINE__TRIAD__EPOCHS=20`. Values are parsed
//! as TOML scalars and fall back to strings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use triad_core::pipeline::PipelineConfig;

use crate::error::{Result, ServiceError};

pub const ENV_PREFIX: &str = "TRIAD_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub seed: u64,
    pub bind: String,
    /// Minimum P(Dropout) that raises an alert.
    pub threshold: f64,
    /// Default model artifact name for scoring and explanations.
    pub model: String,
    /// Rows per forward pass during scoring.
    pub batch_size: usize,
    /// Scoring worker threads; 0 uses every core.
    pub workers: usize,
    /// Log records between snapshots.
    pub snapshot_every: u64,
    /// Static bearer token; empty disables the check.
    pub token: String,
    pub page_size: usize,
    pub pipeline: PipelineConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            seed: 0,
            bind: "127.0.0.1:8080".into(),
            threshold: 0.5,
            model: "triad".into(),
            batch_size: 256,
            workers: 0,
            snapshot_every: 1000,
            token: String::new(),
            page_size: 50,
            pipeline: PipelineConfig::default(),
        }
    }
}

fn env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(root: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = root;
    for p in parents {
        let entry = table
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| ServiceError::Config(format!("{p} is not a table")))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

impl ServiceConfig {
    /// Parses `text` and applies overrides from `env` (key, value) pairs.
    pub fn from_parts(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ServiceError::Config(e.message().to_string()))?;
        for (k, v) in env {
            let Some(key) = k.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let path: Vec<String> = key.split("__").map(str::to_lowercase).collect();
            if path.iter().any(String::is_empty) {
                continue;
            }
            set_path(&mut table, &path, env_value(&v))?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ServiceError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or starts from defaults) and applies the process
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| ServiceError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_parts(&text, std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() || self.threshold < 0.0 {
            return Err(ServiceError::Config(format!("threshold {} must be >= 0", self.threshold)));
        }
        if self.batch_size == 0 || self.page_size == 0 || self.snapshot_every == 0 {
            return Err(ServiceError::Config("batch_size, page_size and snapshot_every must be positive".into()));
        }
        Ok(())
    }

    /// Pipeline settings with every experiment seed set to `seed`.
    pub fn pipeline(&self) -> PipelineConfig {
        self.pipeline.clone().with_seed(self.seed)
    }

    pub fn workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}
