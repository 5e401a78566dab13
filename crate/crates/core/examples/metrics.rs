//! Metric suite on a small hand-made prediction set: confusion matrix,
//! macro-F1, OvR ROC-AUC, average precision, ECE bins, bootstrap intervals
//! and McNemar's test.

use ndarray::array;
use triad_core::eval::{
    bootstrap_ci, classification_metrics, ece, evaluate, mcnemar, EvalOptions, REFERENCE_MCNEMAR_CHI2,
};

fn main() -> triad_core::Result<()> {
    let y = [0, 0, 1, 1, 2, 2, 1, 0];
    let p = array![
        [0.8, 0.1, 0.1],
        [0.5, 0.3, 0.2],
        [0.2, 0.7, 0.1],
        [0.4, 0.45, 0.15],
        [0.1, 0.2, 0.7],
        [0.3, 0.3, 0.4],
        [0.6, 0.3, 0.1],
        [0.2, 0.5, 0.3]
    ];
    let m = classification_metrics(&y, p.view())?;
    println!("confusion {:?}", m.confusion);
    let r = evaluate("toy", &y, p.view(), &EvalOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    let (e, bins) = ece(&y, p.view(), 5)?;
    println!("ECE(5 bins) {e:.4}");
    for b in bins.bins.iter().filter(|b| b.count > 0) {
        println!("  [{:.1}, {:.1}) n={} conf={:.3} acc={:.3}", b.lower, b.upper, b.count, b.confidence, b.accuracy);
    }
    let ci = bootstrap_ci(
        |y, p| classification_metrics(y, p).map(|m| m.accuracy).unwrap_or(f64::NAN),
        &y,
        p.view(),
        5000,
        0.05,
        1,
    )?;
    println!("accuracy 95% CI [{:.3}, {:.3}]", ci.lo, ci.hi);
    let t = mcnemar(78, 23)?;
    println!(
        "McNemar b=78 c=23: chi2 {:.2} p {:.2e} (published figure {REFERENCE_MCNEMAR_CHI2})",
        t.chi2, t.p_value
    );
    Ok(())
}
