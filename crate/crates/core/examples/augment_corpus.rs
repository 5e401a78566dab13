//! Synthesizes the comment corpus and timestamps for the surrogate cohort
//! and prints the corpus statistics.

use triad_core::augment::{augment, corpus_stats, AugmentConfig};
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};

fn main() -> triad_core::Result<()> {
    let cfg = AugmentConfig::default();
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg)?;
    let s = corpus_stats(&cohort);
    println!("{}", serde_json::to_string_pretty(&s)?);
    let r = &cohort.rows[0];
    println!("\nstudent {} ({}) wrote {} comments, newest first:", r.id, r.label.name(), r.comments.len());
    for c in &r.comments {
        println!("  [week {:>2}] {}", cfg.week_of(c.age_days), c.text);
    }
    Ok(())
}
