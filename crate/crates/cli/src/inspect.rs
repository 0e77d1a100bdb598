use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use regchange::dataforge::{list_samples, read_sample};
use regchange::io::{read_flo, read_mask_png, write_mask_png, write_png};
use regchange::numerics::{warp_by_flow, FlowField, RasterImage};

use crate::config::{ensure_dir, Settings};
use crate::pred::{PredMeta, PredPaths};
use crate::{CliError, Common, Outcome};

#[derive(Debug, Default, clap::Args)]
pub struct InspectArgs {
    /// Synthesized corpus directory.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Directory written by `forward`; optional.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Comma-separated sample ids; all samples when omitted.
    #[arg(long)]
    pub stems: Option<String>,
}

pub fn run(common: &Common, args: &InspectArgs) -> Result<Outcome, CliError> {
    let s = Settings::resolve(
        "inspect",
        &[("corpus", ""), ("pred", ""), ("stems", ""), ("output", ""), ("workers", "0")],
        common.config.as_deref(),
        &[
            ("corpus", args.corpus.as_ref().map(|p| p.display().to_string())),
            ("pred", args.pred.as_ref().map(|p| p.display().to_string())),
            ("stems", args.stems.clone()),
            ("output", common.output_str()),
            ("workers", common.workers.map(|v| v.to_string())),
        ],
    )?;
    s.apply_workers()?;
    let corpus = s.required_path("corpus")?;
    let output = s.required_path("output")?;
    let pred = s.path("pred");
    let mut stems: Vec<String> = s.list("stems")?;
    if stems.is_empty() {
        stems = list_samples(&corpus)?;
    }
    ensure_dir(&output)?;
    s.write_sidecar(&output)?;
    let results: Vec<_> = stems
        .par_iter()
        .map(|stem| inspect_one(&corpus, pred.as_deref(), &output, stem))
        .collect();
    let mut outcome = Outcome::default();
    for (stem, r) in stems.iter().zip(results) {
        if let Err(e) = r {
            log::error!("{stem}: {e}");
            outcome.failures += 1;
        }
    }
    Ok(outcome)
}

fn panel(output: &Path, stem: &str, name: &str) -> PathBuf {
    output.join(format!("{stem}_panel_{name}.png"))
}

fn inspect_one(corpus: &Path, pred: Option<&Path>, output: &Path, stem: &str) -> regchange::Result<()> {
    let (sample, _) = read_sample(corpus, stem)?;
    write_png(&panel(output, stem, "source"), &sample.source_image)?;
    write_png(&panel(output, stem, "target"), &sample.target_image)?;
    write_png(&panel(output, stem, "gt_warped"), &warp_by_flow(&sample.source_image, &sample.gt_flow)?)?;
    write_mask_png(&panel(output, stem, "gt_change"), &sample.change_map)?;
    write_png(&panel(output, stem, "gt_flow_magnitude"), &magnitude_heat_map(&sample.gt_flow))?;

    let Some(pred_dir) = pred else { return Ok(()) };
    let paths = PredPaths::new(pred_dir, stem);
    if !paths.meta.exists() || !paths.flow.exists() || !paths.change.exists() {
        log::warn!("{stem}: no prediction in {}; ground-truth panels only", pred_dir.display());
        return Ok(());
    }
    let meta: PredMeta = serde_json::from_str(&fs::read_to_string(&paths.meta).map_err(|e| regchange::Error::File {
        path: paths.meta.clone(),
        message: e.to_string(),
    })?)
    .map_err(|e| regchange::Error::File {
        path: paths.meta.clone(),
        message: e.to_string(),
    })?;
    let source = sample
        .source_image
        .crop(meta.crop_top, meta.crop_left, meta.crop_height, meta.crop_width)?;
    let flow = read_flo(&paths.flow)?;
    write_png(&panel(output, stem, "pred_warped"), &warp_by_flow(&source, &flow)?)?;
    write_mask_png(&panel(output, stem, "pred_change"), &read_mask_png(&paths.change)?)?;
    write_png(&panel(output, stem, "pred_flow_magnitude"), &magnitude_heat_map(&flow))?;
    Ok(())
}

/// Flow magnitude scaled to its maximum, coloured from blue (still) to red.
pub fn magnitude_heat_map(flow: &FlowField<f32>) -> RasterImage<f32> {
    let (h, w) = flow.dims();
    let mag: Vec<f32> = flow.data().chunks_exact(2).map(|uv| uv[0].hypot(uv[1])).collect();
    let max = mag.iter().copied().fold(0.0f32, f32::max);
    RasterImage::from_fn(h, w, 3, |y, x, c| {
        let t = if max > 0.0 { mag[y * w + x] / max } else { 0.0 };
        match c {
            0 => t,
            1 => 1.0 - (2.0 * t - 1.0).abs(),
            _ => 1.0 - t,
        }
    })
}
