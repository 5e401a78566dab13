//! Trains the gated cross-modal model and inspects one forward pass: gate
//! value, attention weights and class probabilities.

use triad_core::augment::augment;
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::eval::{classification_metrics, ece};
use triad_core::features::stratified_split;
use triad_core::pipeline::{analyze_cohort, prepare, train_model, ModelKind, PipelineConfig};
use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let cfg = PipelineConfig::default();
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default())?, &cfg.augment)?;
    let split = stratified_split(&cohort, cfg.test_frac, cfg.seed)?;
    let texts = analyze_cohort(&TextPipeline::reference()?, &cohort)?;
    let data = prepare(&cohort, &split, &texts, &cfg, true)?;
    let art = train_model(ModelKind::Triad, &data, &cfg)?;
    let m = art.model.as_triad().expect("fusion model");
    for e in &m.history {
        println!("epoch {:>3}  train {:.4}  val {:.4}", e.epoch, e.train_loss, e.val_loss);
    }
    let p = art.predict(data.test.x_tab.view(), data.test.x_txt.view())?;
    let cm = classification_metrics(&data.test.y, p.view())?;
    println!("\ntest accuracy {:.3}  macro-F1 {:.3}  ECE {:.3}", cm.accuracy, cm.macro_f1, ece(&data.test.y, p.view(), 10)?.0);

    let row = data.test.x_tab.row(0).to_vec();
    let txt = data.test.x_txt.row(0).to_vec();
    let (probs, trace) = m.forward(&row, &txt)?;
    println!("\nfirst test learner: probs {probs:.3?}  gate {:.3?}", trace.gate);
    println!("attention tab->text per head {:?}", trace.tab_to_text);
    Ok(())
}
