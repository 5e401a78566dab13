//! Per-learner end-to-end scoring latency (embed + retrieve + forward) and
//! batch throughput on one core.

use triad_core::augment::augment;
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::eval::measure_latency;
use triad_core::features::stratified_split;
use triad_core::pipeline::{analyze_cohort, prepare, train_model, ModelKind, PipelineConfig, Scorer};
use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.triad.epochs = 5;
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg.augment)?;
    let split = stratified_split(&cohort, cfg.test_frac, cfg.seed)?;
    let texts = analyze_cohort(&TextPipeline::reference()?, &cohort)?;
    let data = prepare(&cohort, &split, &texts, &cfg, true)?;
    let model = train_model(ModelKind::Triad, &data, &cfg)?;
    let scorer = Scorer::new(TextPipeline::reference()?, data.features.clone(), model, cfg.augment.clone());
    let rows: Vec<_> = split.test.iter().map(|&i| cohort.rows[i].clone()).collect();
    let s = measure_latency(rows.len(), 50, 1000, |i| {
        std::hint::black_box(scorer.score(&rows[i]).expect("score"));
    })?;
    println!("per learner: mean {:.3} ms  p95 {:.3} ms  max {:.3} ms", s.mean_ms, s.p95_ms, s.max_ms);
    let t = std::time::Instant::now();
    let probs = scorer.score_many(&cohort.rows, 256)?;
    let per = t.elapsed().as_secs_f64() * 1e3 / probs.len() as f64;
    println!(
        "batch of {}: {:.3} ms per learner, 50k learners in about {:.1} s",
        probs.len(),
        per,
        per * 50.0
    );
    Ok(())
}
