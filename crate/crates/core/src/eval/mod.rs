//! Metrics, calibration, bootstrap intervals, McNemar's test, latency
//! timing and the benchmark/ablation tables.

mod metrics;
mod report;
mod stats;

pub use metrics::{
    average_precision, binary_auc, classification_metrics, ece, metrics_from_confusion, pr_auc_dropout,
    resample_rows, roc_auc_ovr, CalibrationBin, CalibrationBins, ClassMetrics, DROPOUT,
};
pub use report::{
    evaluate, reference_row, AblationRow, AblationTable, BenchmarkTable, ConfidenceIntervals, EvalOptions,
    EvalReport, ReferenceRow, DEFAULT_ALPHA, DEFAULT_BINS, DEFAULT_RESAMPLES, REFERENCE_ABLATION_PP,
    REFERENCE_MCNEMAR_CHI2, REFERENCE_ROWS,
};
pub use stats::{
    bootstrap_ci, discordant_counts, mcnemar, measure_latency, paired_bootstrap, quantile_sorted, Interval,
    LatencyStats, McNemar, PairedComparison,
};
