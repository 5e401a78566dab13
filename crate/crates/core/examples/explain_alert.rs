//! Trains the fusion model, then builds the full alert for the riskiest
//! held-out learner: Shapley attribution over the raw tabular fields, the
//! cited passage, the rationale and the intervention plan, walked forward
//! on a logical clock.

use chrono::{Duration, TimeZone, Utc};
use triad_core::augment::augment;
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::explain::{ManualClock, PlanEvent};
use triad_core::features::stratified_split;
use triad_core::pipeline::{analyze_cohort, prepare, train_model, ModelKind, PipelineConfig, Scorer};
use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let cfg = PipelineConfig::default();
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg.augment)?;
    let split = stratified_split(&cohort, cfg.test_frac, cfg.seed)?;
    let texts = analyze_cohort(&TextPipeline::reference()?, &cohort)?;
    let data = prepare(&cohort, &split, &texts, &cfg, true)?;
    let model = train_model(ModelKind::Triad, &data, &cfg)?;
    let p = model.predict(data.test.x_tab.view(), data.test.x_txt.view())?;
    let riskiest = (0..p.nrows()).max_by(|&a, &b| p[[a, 1]].total_cmp(&p[[b, 1]])).unwrap();
    let row = &cohort.rows[split.test[riskiest]];

    let scorer = Scorer::new(TextPipeline::reference()?, data.features.clone(), model, cfg.augment.clone());
    let now = Utc.with_ymd_and_hms(2025, 12, 5, 9, 0, 0).unwrap();
    let ex = scorer.explain(row, data.background.view(), cfg.shapley_samples, cfg.seed, now)?;
    println!("{}\n", ex.rationale.text);
    println!(
        "prediction {:.3}  base {:.3}  additivity gap {:.4}",
        ex.attribution.prediction, ex.attribution.base_value, ex.attribution.additivity_gap
    );
    for f in ex.attribution.ranked().iter().take(6) {
        println!("  {:<40} {:+.4}", f.name, f.phi);
    }

    let clock = ManualClock::new(now);
    let mut plan = ex.plan.advance(PlanEvent::Deliver, &clock)?;
    println!("\nplan: {}", plan.describe());
    clock.advance(Duration::days(7));
    plan = plan.advance(PlanEvent::EscalateCheck, &clock)?;
    println!("after 7 days without a response: {:?}, action \"{}\"", plan.state, plan.current_action());
    Ok(())
}
