use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{relaxed_confusion, RelaxedConfusion};
use crate::net::ChangeProbMap;
use crate::numerics::{BinaryMask, FlowField};
use crate::scalar::Real;

/// Default relaxation radii.
pub const DEFAULT_RADII: [usize; 2] = [0, 5];
/// Default PCK tolerance as a fraction of the larger image side.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Default binarization threshold on the changed-class probability.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Percentages at one radius. `None` marks a 0/0 ratio.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MetricReport {
    pub radius: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub iou: Option<f64>,
    pub oa: Option<f64>,
    pub pck: Option<f64>,
    pub delta: f64,
}

impl MetricReport {
    pub fn values(&self) -> [Option<f64>; 6] {
        [self.precision, self.recall, self.f1, self.iou, self.oa, self.pck]
    }
}

/// Ratio metrics of a confusion. PCK is left undefined.
pub fn metrics_from_confusion(c: &RelaxedConfusion) -> MetricReport {
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    MetricReport {
        radius: c.radius,
        precision,
        recall,
        f1,
        iou: ratio(c.true_pos, c.true_pos + c.false_pos + c.false_neg),
        oa: ratio(c.true_pos + c.true_neg, c.evaluated()),
        pck: None,
        delta: 0.0,
    }
}

/// Valid pixels within the PCK tolerance, and all valid pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct PckCounts {
    pub correct: u64,
    pub total: u64,
}

impl PckCounts {
    pub fn percent(&self) -> Option<f64> {
        ratio(self.correct, self.total)
    }
}

impl std::ops::Add for PckCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            correct: self.correct + o.correct,
            total: self.total + o.total,
        }
    }
}

/// Endpoint-error tolerance in pixels: `delta · max(H, W)`.
pub fn pck_threshold(height: usize, width: usize, delta: f64) -> f64 {
    delta * height.max(width) as f64
}

pub fn pck_counts<T: Real>(pred: &FlowField<T>, gt: &FlowField<T>, valid: &BinaryMask, delta: f64) -> Result<PckCounts> {
    if pred.dims() != gt.dims() || gt.dims() != valid.dims() {
        return Err(Error::InvalidArgument(format!(
            "pck: prediction {:?}, ground truth {:?}, mask {:?}",
            pred.dims(),
            gt.dims(),
            valid.dims()
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("pck delta must be positive, got {delta}")));
    }
    let (h, w) = gt.dims();
    let threshold = pck_threshold(h, w, delta);
    let mut counts = PckCounts::default();
    for y in 0..h {
        for x in 0..w {
            if valid.get(y, x) {
                let (u, v) = pred.get(y, x);
                let (gu, gv) = gt.get(y, x);
                let err = (u.widen() - gu.widen()).hypot(v.widen() - gv.widen());
                counts.total += 1;
                counts.correct += (err <= threshold) as u64;
            }
        }
    }
    Ok(counts)
}

/// PCK as a percentage; an empty mask is an error.
pub fn pck<T: Real>(pred: &FlowField<T>, gt: &FlowField<T>, valid: &BinaryMask, delta: f64) -> Result<f64> {
    pck_counts(pred, gt, valid, delta)?
        .percent()
        .ok_or_else(|| Error::UndefinedMetric("pck over an empty mask".into()))
}

/// Evaluation settings shared across a corpus.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalParams {
    pub radii: Vec<usize>,
    pub delta: f64,
    pub threshold: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            radii: DEFAULT_RADII.to_vec(),
            delta: DEFAULT_DELTA,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Raw counts for one sample; ratios are derived on demand so that corpus
/// totals can sum counts first.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEvaluation {
    pub id: String,
    pub confusions: Vec<RelaxedConfusion>,
    pub pck: PckCounts,
    pub delta: f64,
}

impl SampleEvaluation {
    pub fn reports(&self) -> Vec<MetricReport> {
        self.confusions
            .iter()
            .map(|c| MetricReport {
                pck: self.pck.percent(),
                delta: self.delta,
                ..metrics_from_confusion(c)
            })
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate_sample<T: Real>(
    id: &str,
    pred_change: &BinaryMask,
    pred_flow: &FlowField<T>,
    gt_change: &BinaryMask,
    gt_flow: &FlowField<T>,
    valid: &BinaryMask,
    radii: &[usize],
    delta: f64,
) -> Result<SampleEvaluation> {
    let confusions = radii
        .iter()
        .map(|&r| relaxed_confusion(pred_change, gt_change, valid, r))
        .collect::<Result<_>>()?;
    Ok(SampleEvaluation {
        id: id.to_string(),
        confusions,
        pck: pck_counts(pred_flow, gt_flow, valid, delta)?,
        delta,
    })
}

/// Binarizes `probs` at `params.threshold` and evaluates.
pub fn evaluate_prediction<T: Real>(
    id: &str,
    probs: &ChangeProbMap<T>,
    pred_flow: &FlowField<T>,
    gt_change: &BinaryMask,
    gt_flow: &FlowField<T>,
    valid: &BinaryMask,
    params: &EvalParams,
) -> Result<SampleEvaluation> {
    let pred = probs.binarize(params.threshold);
    evaluate_sample(id, &pred, pred_flow, gt_change, gt_flow, valid, &params.radii, params.delta)
}

/// Micro-averaged corpus totals: counts are summed over samples, then
/// turned into ratios.
pub fn aggregate(samples: &[SampleEvaluation], radii: &[usize], delta: f64) -> SampleEvaluation {
    let mut confusions: Vec<_> = radii.iter().map(|&r| RelaxedConfusion::empty(r)).collect();
    let mut pck = PckCounts::default();
    for s in samples {
        for (acc, c) in confusions.iter_mut().zip(&s.confusions) {
            *acc += *c;
        }
        pck = pck + s.pck;
    }
    SampleEvaluation {
        id: "total".into(),
        confusions,
        pck,
        delta,
    }
}

/// Evaluates many samples in parallel. Results keep the input order.
pub fn evaluate_all<F>(count: usize, f: F) -> Vec<Result<SampleEvaluation>>
where
    F: Fn(usize) -> Result<SampleEvaluation> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Formats a percentage, or `undefined` when absent.
pub fn format_metric(value: Option<f64>, undefined: &str) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => undefined.to_string(),
    }
}

pub const REPORT_HEADER: &str = "sample_id,radius,P,R,F1,IoU,OA,PCK";

/// CSV report: one row per sample and radius, sorted by sample id, then the
/// corpus totals. Undefined values are empty cells.
pub fn report_csv(samples: &[SampleEvaluation], total: &SampleEvaluation) -> String {
    let mut sorted: Vec<&SampleEvaluation> = samples.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for s in sorted.into_iter().chain(std::iter::once(total)) {
        for r in s.reports() {
            let _ = write!(out, "{},{}", s.id, r.radius);
            for v in r.values() {
                let _ = write!(out, ",{}", format_metric(v, ""));
            }
            out.push('\n');
        }
    }
    out
}

/// Human-readable table with `--` for undefined values.
pub fn report_table(samples: &[SampleEvaluation], total: &SampleEvaluation) -> String {
    let mut out = format!(
        "{:<24} {:>3} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
        "sample", "r", "P", "R", "F1", "IoU", "OA", "PCK"
    );
    for s in samples.iter().chain(std::iter::once(total)) {
        for r in s.reports() {
            let _ = write!(out, "{:<24} {:>3}", s.id, r.radius);
            for v in r.values() {
                let _ = write!(out, " {:>9}", format_metric(v, "--"));
            }
            out.push('\n');
        }
    }
    out
}
