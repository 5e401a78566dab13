//! Stage orchestration: configuration, on-disk artifacts, data preparation,
//! training, scoring and explanation.

mod artifacts;
mod prepare;
mod score;
mod train;

use serde::{Deserialize, Serialize};

pub use artifacts::{Background, DataDir, BACKGROUND_BUNDLE_KIND};
pub use prepare::{analyze_cohort, load_clean, prepare, prepare_variant, Fold, Prepared};
pub use score::{Explanation, Scored, Scorer};
pub use train::{run_ablation, run_benchmark, train_model, AblationRun, ModelArtifact, ModelKind, TrainedModel};

use crate::augment::AugmentConfig;
use crate::eval::EvalOptions;
use crate::fusion::TriadConfig;
use crate::models::{LogisticConfig, MlpConfig};
use crate::resample::ResamplePlan;

/// Every knob of the pipeline. Deserializes from partial documents; missing
/// keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub test_frac: f64,
    pub augment: AugmentConfig,
    pub resample: ResamplePlan,
    pub logistic: LogisticConfig,
    pub mlp: MlpConfig,
    pub triad: TriadConfig,
    /// Focal class weights; `None` derives them from the training fold
    /// before oversampling.
    pub focal_alpha: Option<[f64; 3]>,
    pub eval: EvalOptions,
    pub shapley_samples: usize,
    pub background_size: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            test_frac: 0.2,
            augment: AugmentConfig::default(),
            resample: ResamplePlan::default(),
            logistic: LogisticConfig::default(),
            mlp: MlpConfig::default(),
            triad: TriadConfig::default(),
            focal_alpha: None,
            eval: EvalOptions::default(),
            shapley_samples: crate::explain::DEFAULT_SHAPLEY_SAMPLES,
            background_size: 1000,
        }
    }
}

impl PipelineConfig {
    /// Sets the split, resampling, model and bootstrap seeds to `seed`. The
    /// corpus seed is left alone: it defines the data, not the experiment.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.resample.seed = seed;
        self.logistic.seed = seed;
        self.mlp.seed = seed;
        self.triad.seed = seed;
        self.eval.seed = seed;
        self
    }
}
