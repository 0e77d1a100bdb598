use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use regchange::dataforge::{list_samples, read_sample};
use regchange::io::{read_flo, read_raw_raster};
use regchange::metrics::{
    aggregate, evaluate_prediction, report_csv, report_table, EvalParams, SampleEvaluation, DEFAULT_DELTA,
    DEFAULT_THRESHOLD,
};
use regchange::net::ChangeProbMap;

use crate::config::{ensure_dir, Settings};
use crate::pred::{PredMeta, PredPaths, PRED_META_SUFFIX};
use crate::{CliError, Common, Outcome};

pub const REPORT_FILE: &str = "report.csv";

#[derive(Debug, Default, clap::Args)]
pub struct EvalArgs {
    /// Directory written by `forward`.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Synthesized corpus holding the ground truth.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Comma-separated relaxation radii in pixels.
    #[arg(long)]
    pub radii: Option<String>,
    /// PCK tolerance as a fraction of the larger image side.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Changed-class probability at which a pixel counts as predicted changed.
    #[arg(long)]
    pub threshold: Option<f64>,
}

pub fn run(common: &Common, args: &EvalArgs) -> Result<Outcome, CliError> {
    let (delta, threshold) = (DEFAULT_DELTA.to_string(), DEFAULT_THRESHOLD.to_string());
    let s = Settings::resolve(
        "eval",
        &[
            ("pred", ""),
            ("gt", ""),
            ("output", ""),
            ("workers", "0"),
            ("radii", "0,5"),
            ("delta", &delta),
            ("threshold", &threshold),
        ],
        common.config.as_deref(),
        &[
            ("pred", args.pred.as_ref().map(|p| p.display().to_string())),
            ("gt", args.gt.as_ref().map(|p| p.display().to_string())),
            ("output", common.output_str()),
            ("workers", common.workers.map(|v| v.to_string())),
            ("radii", args.radii.clone()),
            ("delta", args.delta.map(|v| v.to_string())),
            ("threshold", args.threshold.map(|v| v.to_string())),
        ],
    )?;
    s.apply_workers()?;
    let pred_dir = s.required_path("pred")?;
    let gt_dir = s.required_path("gt")?;
    let output = s.required_path("output")?;
    let params = EvalParams {
        radii: s.list("radii")?,
        delta: s.get("delta")?,
        threshold: s.get("threshold")?,
    };
    if !(params.delta > 0.0 && params.delta.is_finite()) {
        return Err(CliError::Config(format!("`delta` must be positive, got {}", params.delta)));
    }
    if !(0.0..=1.0).contains(&params.threshold) {
        return Err(CliError::Config(format!("`threshold` must lie in [0, 1], got {}", params.threshold)));
    }
    ensure_dir(&output)?;
    s.write_sidecar(&output)?;

    let preds: BTreeSet<String> = regchange::dataforge::list_stems(&pred_dir, PRED_META_SUFFIX)?.into_iter().collect();
    let gts: BTreeSet<String> = list_samples(&gt_dir)?.into_iter().collect();
    let mut outcome = Outcome::default();
    let orphans: Vec<&String> = preds.symmetric_difference(&gts).collect();
    if !orphans.is_empty() {
        for id in &orphans {
            let side = if preds.contains(*id) { "prediction" } else { "ground truth" };
            log::error!("orphan {side} without a counterpart: {id}");
        }
        outcome.failures += orphans.len();
    }
    let matched: Vec<&String> = preds.intersection(&gts).collect();
    let results: Vec<_> = matched
        .par_iter()
        .map(|stem| eval_one(&pred_dir, &gt_dir, stem, &params))
        .collect();
    let mut samples = Vec::new();
    for (stem, r) in matched.iter().zip(results) {
        match r {
            Ok(e) => samples.push(e),
            Err(e) => {
                log::error!("{stem}: {e}");
                outcome.failures += 1;
            }
        }
    }
    let total = aggregate(&samples, &params.radii, params.delta);
    let path = output.join(REPORT_FILE);
    fs::write(&path, report_csv(&samples, &total)).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
    print!("{}", report_table(&samples, &total));
    Ok(outcome)
}

fn eval_one(pred_dir: &Path, gt_dir: &Path, stem: &str, params: &EvalParams) -> regchange::Result<SampleEvaluation> {
    let paths = PredPaths::new(pred_dir, stem);
    let text = fs::read_to_string(&paths.meta).map_err(|e| regchange::Error::File {
        path: paths.meta.clone(),
        message: e.to_string(),
    })?;
    let meta: PredMeta = serde_json::from_str(&text).map_err(|e| regchange::Error::File {
        path: paths.meta.clone(),
        message: e.to_string(),
    })?;
    let (gt, _) = read_sample(gt_dir, stem)?;
    if gt.gt_flow.dims() != (meta.height, meta.width) {
        return Err(regchange::Error::InvalidShape(format!(
            "prediction made for {}x{}, ground truth is {:?}",
            meta.height,
            meta.width,
            gt.gt_flow.dims()
        )));
    }
    let (t, l, h, w) = (meta.crop_top, meta.crop_left, meta.crop_height, meta.crop_width);
    let gt_flow = gt.gt_flow.crop(t, l, h, w)?;
    let valid = gt.validity_mask.crop(t, l, h, w)?;
    let change = gt.change_map.crop(t, l, h, w)?;
    let flow = read_flo(&paths.flow)?;
    let probs = ChangeProbMap::new(read_raw_raster(&paths.probs)?)?;
    evaluate_prediction(stem, &probs, &flow, &change, &gt_flow, &valid, params)
}
