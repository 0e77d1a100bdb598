//! Change-detection metrics relaxed by a pixel radius, and flow PCK.
//!
//! Ratios are computed from integer counts; corpus totals sum the counts of
//! all samples before dividing.

mod confusion;
mod report;

pub use confusion::{relaxed_confusion, RelaxedConfusion};
pub use report::{
    aggregate, evaluate_all, evaluate_prediction, evaluate_sample, format_metric, metrics_from_confusion, pck,
    pck_counts, pck_threshold, report_csv, report_table, EvalParams, MetricReport, PckCounts, SampleEvaluation,
    DEFAULT_DELTA, DEFAULT_RADII, DEFAULT_THRESHOLD, REPORT_HEADER,
};
