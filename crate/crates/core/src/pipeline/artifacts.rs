use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde_json::json;

use crate::bundle::Bundle;
use crate::{Error, Result};

pub const BACKGROUND_BUNDLE_KIND: &str = "background";

/// Fixed file layout under one data directory.
#[derive(Debug, Clone)]
pub struct DataDir {
    pub root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Ingested, cleaned and imputed cohort.
    pub fn cohort(&self) -> PathBuf {
        self.root.join("cohort.jsonl")
    }

    /// Cohort with synthesized comments and timestamps.
    pub fn augmented(&self) -> PathBuf {
        self.root.join("augmented.jsonl")
    }

    pub fn corpus_stats(&self) -> PathBuf {
        self.root.join("corpus_stats.json")
    }

    pub fn split(&self) -> PathBuf {
        self.root.join("split.json")
    }

    pub fn features(&self) -> PathBuf {
        self.root.join("features.bundle")
    }

    pub fn background(&self) -> PathBuf {
        self.root.join("background.bundle")
    }

    pub fn model(&self, name: &str) -> PathBuf {
        self.root.join("models").join(format!("{name}.bundle"))
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report(&self, name: &str) -> PathBuf {
        self.reports().join(name)
    }

    pub fn store(&self) -> PathBuf {
        self.root.join("store")
    }

    pub fn require(path: &Path, what: &str) -> Result<()> {
        if path.exists() {
            Ok(())
        } else {
            Err(Error::ModelMissing(format!("{what} not found at {}", path.display())))
        }
    }
}

/// Encoded tabular rows used as the Shapley reference distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    pub x_tab: Array2<f64>,
}

impl Background {
    pub fn to_bundle(&self) -> Bundle {
        let mut b = Bundle::new(BACKGROUND_BUNDLE_KIND, json!({ "rows": self.x_tab.nrows() }));
        let flat: Vec<f64> = self.x_tab.iter().copied().collect();
        b.push("x_tab", &[self.x_tab.nrows(), self.x_tab.ncols()], &flat);
        b
    }

    pub fn from_bundle(b: &Bundle) -> Result<Self> {
        b.expect_kind(BACKGROUND_BUNDLE_KIND)?;
        let (shape, v) = b.tensor("x_tab")?;
        let x_tab = Array2::from_shape_vec((shape[0], shape[1]), v).map_err(|e| Error::BadBundle(e.to_string()))?;
        Ok(Self { x_tab })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_bundle().write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bundle(&Bundle::read_model(path)?)
    }
}
