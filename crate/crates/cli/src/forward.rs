use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use regchange::dataforge::{list_samples, read_sample};
use regchange::io::{write_flo, write_mask_png, write_raw_raster};
use regchange::metrics::DEFAULT_THRESHOLD;
use regchange::net::{init_weights, ArchConfig, ChangeNet, ReferenceExtractor, WeightStore};

use crate::config::{ensure_dir, Settings};
use crate::pred::{center_crop, PredMeta, PredPaths};
use crate::{CliError, Common, Outcome};

#[derive(Debug, Default, clap::Args)]
pub struct ForwardArgs {
    /// Synthesized corpus directory.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Weight container; without it weights are initialized from `--seed`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Architecture file (`key = value`); defaults apply otherwise.
    #[arg(long)]
    pub arch: Option<PathBuf>,
    /// Changed-class probability at which the binary map switches on.
    #[arg(long)]
    pub threshold: Option<f64>,
}

pub fn load_arch(path: Option<&Path>) -> Result<ArchConfig, CliError> {
    match path {
        None => Ok(ArchConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ArchConfig::from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn run(common: &Common, args: &ForwardArgs) -> Result<Outcome, CliError> {
    let threshold = DEFAULT_THRESHOLD.to_string();
    let s = Settings::resolve(
        "forward",
        &[
            ("corpus", ""),
            ("output", ""),
            ("seed", "0"),
            ("workers", "0"),
            ("weights", ""),
            ("arch", ""),
            ("threshold", &threshold),
        ],
        common.config.as_deref(),
        &[
            ("corpus", args.corpus.as_ref().map(|p| p.display().to_string())),
            ("output", common.output_str()),
            ("seed", common.seed.map(|v| v.to_string())),
            ("workers", common.workers.map(|v| v.to_string())),
            ("weights", args.weights.as_ref().map(|p| p.display().to_string())),
            ("arch", args.arch.as_ref().map(|p| p.display().to_string())),
            ("threshold", args.threshold.map(|v| v.to_string())),
        ],
    )?;
    s.apply_workers()?;
    let corpus = s.required_path("corpus")?;
    let output = s.required_path("output")?;
    let threshold: f64 = s.get("threshold")?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Config(format!("`threshold` must lie in [0, 1], got {threshold}")));
    }
    let arch = load_arch(s.path("arch").as_deref())?;
    let weights = match s.path("weights") {
        Some(path) => WeightStore::load_for(&path, &arch)?,
        None => init_weights(s.get("seed")?, &arch),
    };
    let net = ChangeNet::from_store(&weights, &arch)?;
    ensure_dir(&output)?;
    s.write_sidecar(&output)?;

    let stems = list_samples(&corpus)?;
    let results: Vec<_> = stems
        .par_iter()
        .map(|stem| forward_one(&net, &corpus, &output, stem, threshold))
        .collect();
    let mut outcome = Outcome::default();
    for (stem, r) in stems.iter().zip(results) {
        if let Err(e) = r {
            log::error!("{stem}: skipped: {e}");
            outcome.failures += 1;
        }
    }
    log::info!("{} of {} samples predicted", stems.len() - outcome.failures, stems.len());
    Ok(outcome)
}

fn forward_one(
    net: &ChangeNet<ReferenceExtractor>,
    corpus: &Path,
    output: &Path,
    stem: &str,
    threshold: f64,
) -> regchange::Result<()> {
    let (sample, meta) = read_sample(corpus, stem)?;
    let (h, w) = (meta.height, meta.width);
    let (top, left, ch, cw) = center_crop(h, w);
    if ch == 0 || cw == 0 {
        return Err(regchange::Error::InvalidShape(format!("{h}x{w} is smaller than one network cell")));
    }
    if (ch, cw) != (h, w) {
        log::info!("{stem}: centre-cropped {h}x{w} to {ch}x{cw} at ({top}, {left})");
    }
    let source = sample.source_image.crop(top, left, ch, cw)?;
    let target = sample.target_image.crop(top, left, ch, cw)?;
    let out = net.forward(&source, &target)?;
    let paths = PredPaths::new(output, stem);
    write_flo(&paths.flow, &out.flow)?;
    write_raw_raster(&paths.probs, out.change.as_raster())?;
    write_mask_png(&paths.change, &out.change.binarize(threshold))?;
    let pred = PredMeta {
        id: stem.to_string(),
        height: h,
        width: w,
        crop_top: top,
        crop_left: left,
        crop_height: ch,
        crop_width: cw,
        threshold,
    };
    let json = serde_json::to_string_pretty(&pred).expect("prediction meta serializes") + "\n";
    fs::write(&paths.meta, json).map_err(|e| regchange::Error::File {
        path: paths.meta.clone(),
        message: e.to_string(),
    })
}
