//! Stratified 80/20 holdout and SMOTENC balancing of the training fold.

use triad_core::augment::augment;
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::features::stratified_split;
use triad_core::pipeline::{analyze_cohort, prepare, PipelineConfig};
use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let cfg = PipelineConfig::default();
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg.augment)?;
    let split = stratified_split(&cohort, cfg.test_frac, cfg.seed)?;
    println!("train {:?}  test {:?}", split.train_histogram, split.test_histogram);
    let texts = analyze_cohort(&TextPipeline::reference()?, &cohort)?;
    let data = prepare(&cohort, &split, &texts, &cfg, true)?;
    let synthetic = data.train.synthetic.iter().filter(|s| **s).count();
    println!(
        "balanced {:?}  total {}  synthetic {}",
        data.train.histogram(),
        data.train.len(),
        synthetic
    );
    println!(
        "x_tab width {}  x_txt width {}  PCA variance kept {:.1}%",
        data.train.x_tab.ncols(),
        data.train.x_txt.ncols(),
        100.0 * data.features.pca.total_explained()
    );
    Ok(())
}
