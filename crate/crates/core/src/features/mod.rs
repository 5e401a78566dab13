//! Tabular and text branches, stratified holdout and persisted feature
//! transforms.

mod encoder;
mod pca;
mod split;
mod text;

use std::path::Path;

use ndarray::{Array1, Array2};
use serde_json::json;

pub use encoder::{dense_raw, raw_field_names, EncoderSlot, TabularEncoder, DENSE_FIELDS};
pub use pca::{fit_pca, PcaModel};
pub use split::{stratified_split, SplitPlan};
pub use text::{
    analyze_student, build_text_vector, silent_text_vector, text_slot_names, QuotedComment,
    StudentText, PCA_DIM, RECENCY_TAU_DAYS, TEXT_WIDTH,
};

use crate::bundle::Bundle;
use crate::textpipe::EMBEDDING_DIM;
use crate::{Error, Result};

/// Fitted tabular encoder and text PCA, persisted together.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    pub encoder: TabularEncoder,
    pub pca: PcaModel,
}

pub const FEATURE_BUNDLE_KIND: &str = "feature-model";

impl FeatureModel {
    /// Fits the encoder on training rows and PCA on the pooled embeddings of
    /// the non-silent training students.
    pub fn fit(train: &[crate::dataset::StudentRecord], texts: &[StudentText]) -> Result<Self> {
        let encoder = TabularEncoder::fit(train)?;
        let rows: Vec<&StudentText> = texts.iter().filter(|t| !t.is_silent()).collect();
        let pca = if rows.is_empty() {
            PcaModel {
                mean: Array1::zeros(EMBEDDING_DIM),
                components: Array2::zeros((0, EMBEDDING_DIM)),
                explained_variance_ratio: Vec::new(),
            }
        } else {
            let x = Array2::from_shape_fn((rows.len(), EMBEDDING_DIM), |(i, j)| rows[i].embedding[j]);
            fit_pca(&x, PCA_DIM)?
        };
        log::info!(
            "text PCA keeps {} components, {:.1}% of variance",
            pca.k(),
            100.0 * pca.total_explained()
        );
        Ok(Self { encoder, pca })
    }

    pub fn to_bundle(&self) -> Bundle {
        let mut b = Bundle::new(
            FEATURE_BUNDLE_KIND,
            json!({
                "levels": self.encoder.levels,
                "explained_variance_ratio": self.pca.explained_variance_ratio,
            }),
        );
        b.push("encoder_mean", &[self.encoder.mean.len()], &self.encoder.mean);
        b.push("encoder_sd", &[self.encoder.sd.len()], &self.encoder.sd);
        b.push("pca_mean", &[self.pca.dim()], self.pca.mean.as_slice().unwrap());
        let comps: Vec<f64> = self.pca.components.iter().copied().collect();
        b.push("pca_components", &[self.pca.k(), self.pca.dim()], &comps);
        b
    }

    pub fn from_bundle(b: &Bundle) -> Result<Self> {
        b.expect_kind(FEATURE_BUNDLE_KIND)?;
        let levels: Vec<Vec<i64>> = serde_json::from_value(b.meta["levels"].clone())?;
        let ratio: Vec<f64> = serde_json::from_value(b.meta["explained_variance_ratio"].clone())?;
        let (_, mean) = b.tensor("encoder_mean")?;
        let (_, sd) = b.tensor("encoder_sd")?;
        let (_, pca_mean) = b.tensor("pca_mean")?;
        let (shape, comps) = b.tensor("pca_components")?;
        let components = Array2::from_shape_vec((shape[0], shape[1]), comps)
            .map_err(|e| Error::BadBundle(e.to_string()))?;
        Ok(Self {
            encoder: TabularEncoder { levels, mean, sd },
            pca: PcaModel {
                mean: Array1::from(pca_mean),
                components,
                explained_variance_ratio: ratio,
            },
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_bundle().write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bundle(&Bundle::read_model(path)?)
    }
}
