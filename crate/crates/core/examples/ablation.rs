//! Trains the full fusion model and the five ablations on the surrogate
//! cohort with its synthetic comment corpus, then prints the comparison.
//!
//! cargo run --release -p triad-core --example ablation -- [seed]

use std::time::Instant;

use triad_core::augment::augment;
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::features::stratified_split;
use triad_core::pipeline::{run_ablation, PipelineConfig};
use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = PipelineConfig {
        eval: triad_core::eval::EvalOptions {
            resamples: 1000,
            ..Default::default()
        },
        ..Default::default()
    }
    .with_seed(seed);
    let t = Instant::now();
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg.augment)?;
    let split = stratified_split(&cohort, cfg.test_frac, cfg.seed)?;
    let mut tp = TextPipeline::reference()?;
    let run = run_ablation(&cohort, &split, &mut tp, &cfg)?;
    print!("{}", run.table.to_text());
    for (name, m) in &run.mcnemar {
        if let Some(m) = m {
            println!("mcnemar full vs {name}: b={} c={} chi2={:.2} p={:.4}", m.b, m.c, m.chi2, m.p_value);
        }
    }
    println!("elapsed {:.1}s", t.elapsed().as_secs_f64());
    Ok(())
}
