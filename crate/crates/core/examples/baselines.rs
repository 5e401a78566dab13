//! Logistic regression and the tabular MLP on the tabular block, evaluated
//! on the held-out fold.

use triad_core::augment::augment;
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::eval::EvalOptions;
use triad_core::features::stratified_split;
use triad_core::pipeline::{analyze_cohort, prepare, run_benchmark, ModelKind, PipelineConfig};
use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let cfg = PipelineConfig {
        eval: EvalOptions {
            resamples: 1000,
            ..Default::default()
        },
        ..Default::default()
    };
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg.augment)?;
    let split = stratified_split(&cohort, cfg.test_frac, cfg.seed)?;
    let texts = analyze_cohort(&TextPipeline::reference()?, &cohort)?;
    let data = prepare(&cohort, &split, &texts, &cfg, true)?;
    let (table, _) = run_benchmark(&data, &[ModelKind::Logistic, ModelKind::Mlp], &cfg)?;
    print!("{}", table.to_text());
    Ok(())
}
