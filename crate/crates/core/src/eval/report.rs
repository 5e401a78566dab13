use std::fmt::Write as _;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::metrics::{classification_metrics, ece, pr_auc_dropout, roc_auc_ovr, CalibrationBins};
use super::stats::{bootstrap_ci, paired_bootstrap, Interval, LatencyStats, PairedComparison};
use crate::Result;

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_RESAMPLES: usize = 5000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub bins: usize,
    pub resamples: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            resamples: DEFAULT_RESAMPLES,
            alpha: DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceIntervals {
    pub macro_f1: Interval,
    pub roc_auc_ovr: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub n: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// `None` when fewer than two classes are present.
    pub roc_auc_ovr: Option<f64>,
    /// `None` when no Dropout rows are present.
    pub pr_auc_dropout: Option<f64>,
    pub ece: f64,
    pub latency: Option<LatencyStats>,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    pub confusion: [[usize; 3]; 3],
    pub calibration: CalibrationBins,
    pub ci: ConfidenceIntervals,
    pub options: EvalOptions,
}

fn macro_f1(y: &[usize], p: ArrayView2<f64>) -> f64 {
    classification_metrics(y, p).map(|m| m.macro_f1).unwrap_or(f64::NAN)
}

fn auc(y: &[usize], p: ArrayView2<f64>) -> f64 {
    roc_auc_ovr(y, p).unwrap_or(f64::NAN)
}

/// Full metric suite with bootstrap intervals on macro-F1 and ROC-AUC.
pub fn evaluate(model: &str, y: &[usize], probs: ArrayView2<f64>, opts: &EvalOptions) -> Result<EvalReport> {
    let m = classification_metrics(y, probs)?;
    let roc = roc_auc_ovr(y, probs).ok();
    let pr = pr_auc_dropout(y, probs).ok();
    let (e, calibration) = ece(y, probs, opts.bins)?;
    let ci = ConfidenceIntervals {
        macro_f1: bootstrap_ci(macro_f1, y, probs, opts.resamples, opts.alpha, opts.seed)?,
        roc_auc_ovr: roc.and_then(|_| bootstrap_ci(auc, y, probs, opts.resamples, opts.alpha, opts.seed).ok()),
    };
    Ok(EvalReport {
        model: model.to_string(),
        n: y.len(),
        accuracy: m.accuracy,
        macro_f1: m.macro_f1,
        roc_auc_ovr: roc,
        pr_auc_dropout: pr,
        ece: e,
        latency: None,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        confusion: m.confusion,
        calibration,
        ci,
        options: *opts,
    })
}

/// Published figures kept for side-by-side context. They come from a
/// private comment corpus and GPU timing, so nothing here is asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub model: &'static str,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub roc_auc_ovr: Option<f64>,
    pub pr_auc_dropout: Option<f64>,
    pub ece: f64,
    pub latency_ms: f64,
}

pub const REFERENCE_ROWS: [ReferenceRow; 6] = [
    ReferenceRow { model: "logistic", accuracy: 0.76, macro_f1: 0.63, roc_auc_ovr: Some(0.81), pr_auc_dropout: Some(0.54), ece: 0.090, latency_ms: 0.3 },
    ReferenceRow { model: "random_forest", accuracy: 0.79, macro_f1: 0.70, roc_auc_ovr: Some(0.85), pr_auc_dropout: Some(0.61), ece: 0.082, latency_ms: 1.7 },
    ReferenceRow { model: "xgboost", accuracy: 0.82, macro_f1: 0.74, roc_auc_ovr: Some(0.88), pr_auc_dropout: Some(0.67), ece: 0.071, latency_ms: 2.1 },
    ReferenceRow { model: "mlp", accuracy: 0.84, macro_f1: 0.77, roc_auc_ovr: None, pr_auc_dropout: None, ece: 0.062, latency_ms: 0.4 },
    ReferenceRow { model: "comment_bert", accuracy: 0.71, macro_f1: 0.59, roc_auc_ovr: None, pr_auc_dropout: None, ece: 0.113, latency_ms: 14.8 },
    ReferenceRow { model: "triad", accuracy: 0.89, macro_f1: 0.85, roc_auc_ovr: Some(0.92), pr_auc_dropout: Some(0.79), ece: 0.042, latency_ms: 14.2 },
];

/// Published macro-F1 change against the full model, in percentage points.
pub const REFERENCE_ABLATION_PP: [(&str, f64); 5] = [
    ("no_rag", -4.0),
    ("no_stress", -3.0),
    ("no_gate", -5.0),
    ("tabular_only", -11.0),
    ("text_only", -26.0),
];

/// Published McNemar statistic for 78 vs 23 discordant errors. The plain
/// formula gives 29.95 for those counts, so the two never agree.
pub const REFERENCE_MCNEMAR_CHI2: f64 = 26.1;

pub fn reference_row(model: &str) -> Option<&'static ReferenceRow> {
    REFERENCE_ROWS.iter().find(|r| r.model == model)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

/// One row per model, rendered as JSON, CSV or aligned text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub rows: Vec<EvalReport>,
}

impl BenchmarkTable {
    const HEADER: [&'static str; 9] = [
        "model", "accuracy", "macro_f1", "macro_f1_lo", "macro_f1_hi", "roc_auc_ovr", "pr_auc_dropout", "ece", "latency_ms",
    ];

    fn cells(r: &EvalReport) -> Vec<String> {
        vec![
            r.model.clone(),
            format!("{:.3}", r.accuracy),
            format!("{:.3}", r.macro_f1),
            format!("{:.3}", r.ci.macro_f1.lo),
            format!("{:.3}", r.ci.macro_f1.hi),
            opt(r.roc_auc_ovr),
            opt(r.pr_auc_dropout),
            format!("{:.3}", r.ece),
            opt(r.latency.map(|l| l.mean_ms)),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&Self::cells(r).join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![Self::HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        rows.extend(self.rows.iter().map(Self::cells));
        align(&rows)
    }
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub macro_f1: f64,
    pub macro_f1_ci: Interval,
    /// Full minus variant, paired over the same resamples.
    pub vs_full: Option<PairedComparison>,
    pub reference_delta_pp: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    /// Builds rows from held-out probabilities, the first entry being the
    /// full model.
    pub fn build(y: &[usize], arms: &[(String, ndarray::Array2<f64>)], opts: &EvalOptions) -> Result<Self> {
        let Some((_, full)) = arms.first() else {
            return Ok(Self::default());
        };
        let mut rows = Vec::new();
        for (i, (name, p)) in arms.iter().enumerate() {
            let vs_full = if i == 0 {
                None
            } else {
                Some(paired_bootstrap(macro_f1, y, full.view(), p.view(), opts.resamples, opts.alpha, opts.seed)?)
            };
            rows.push(AblationRow {
                variant: name.clone(),
                macro_f1: classification_metrics(y, p.view())?.macro_f1,
                macro_f1_ci: bootstrap_ci(macro_f1, y, p.view(), opts.resamples, opts.alpha, opts.seed)?,
                vs_full,
                reference_delta_pp: REFERENCE_ABLATION_PP.iter().find(|(n, _)| n == name).map(|(_, d)| *d),
            });
        }
        Ok(Self { rows })
    }

    pub fn macro_f1(&self, variant: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.variant == variant).map(|r| r.macro_f1)
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![["variant", "macro_f1", "ci_lo", "ci_hi", "delta_pp", "delta_lo", "delta_hi", "reference_pp"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()];
        for r in &self.rows {
            let (d, lo, hi) = match &r.vs_full {
                // reported as variant minus full, matching the published sign
                Some(c) => (
                    format!("{:+.1}", -100.0 * c.delta),
                    format!("{:+.1}", -100.0 * c.ci.hi),
                    format!("{:+.1}", -100.0 * c.ci.lo),
                ),
                None => ("-".into(), "-".into(), "-".into()),
            };
            rows.push(vec![
                r.variant.clone(),
                format!("{:.3}", r.macro_f1),
                format!("{:.3}", r.macro_f1_ci.lo),
                format!("{:.3}", r.macro_f1_ci.hi),
                d,
                lo,
                hi,
                r.reference_delta_pp.map(|v| format!("{v:+.0}")).unwrap_or_else(|| "-".into()),
            ]);
        }
        align(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,macro_f1,ci_lo,ci_hi,delta_vs_full,reference_pp\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{},{}",
                r.variant,
                r.macro_f1,
                r.macro_f1_ci.lo,
                r.macro_f1_ci.hi,
                r.vs_full.map(|c| format!("{:.6}", -c.delta)).unwrap_or_default(),
                r.reference_delta_pp.map(|v| v.to_string()).unwrap_or_default(),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn report_rates_are_bounded() {
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let p = Array2::from_shape_fn((30, 3), |(i, j)| if (i + j) % 3 == 0 { 0.5 } else { 0.25 });
        let opts = EvalOptions { resamples: 50, ..Default::default() };
        let r = evaluate("toy", &y, p.view(), &opts).unwrap();
        assert_eq!(r.confusion.iter().flatten().sum::<usize>(), 30);
        for v in [r.accuracy, r.macro_f1, r.ece, r.roc_auc_ovr.unwrap(), r.pr_auc_dropout.unwrap()] {
            assert!((0.0..=1.0).contains(&v));
        }
        let t = BenchmarkTable { rows: vec![r] };
        assert_eq!(t.to_csv().lines().count(), 2);
        assert!(t.to_text().starts_with("model"));
    }

    #[test]
    fn empty_arms_give_empty_table() {
        let t = AblationTable::build(&[0, 1], &[], &EvalOptions::default()).unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn reference_constants() {
        let t = reference_row("triad").unwrap();
        assert_eq!((t.accuracy, t.macro_f1, t.roc_auc_ovr, t.pr_auc_dropout), (0.89, 0.85, Some(0.92), Some(0.79)));
        assert_eq!(t.latency_ms, 14.2);
        assert_eq!(reference_row("logistic").unwrap().macro_f1, 0.63);
        let d: Vec<f64> = REFERENCE_ABLATION_PP.iter().map(|x| x.1).collect();
        assert_eq!(d, vec![-4.0, -3.0, -5.0, -11.0, -26.0]);
    }
}
