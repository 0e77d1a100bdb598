use std::fs;
use std::path::Path;

use rayon::prelude::*;
use regchange::dataforge::{
    load_registered_pair, read_manifest, sample_affine_params, synthesize_pair, write_sample, AffineSamplingConfig,
    ManifestEntry, SampleCounts, SampleMeta, StatsTable, MANIFEST_FILE, MIN_POSITIVE_PIXELS,
};

use crate::config::{ensure_dir, Settings};
use crate::{CliError, Common, Outcome};

#[derive(Debug, Default, clap::Args)]
pub struct SynthArgs {
    /// Registered corpus (manifest.csv plus images and annotations).
    #[arg(long)]
    pub input: Option<std::path::PathBuf>,
    #[arg(long)]
    pub max_rotation: Option<f64>,
    #[arg(long)]
    pub scale_min: Option<f64>,
    #[arg(long)]
    pub scale_max: Option<f64>,
    /// Translation bound as a fraction of the shorter side.
    #[arg(long)]
    pub max_translation: Option<f64>,
    #[arg(long)]
    pub max_shear: Option<f64>,
    /// Samples with fewer changed pixels in the valid area are dropped.
    #[arg(long)]
    pub min_positive: Option<usize>,
}

pub const STATS_FILE: &str = "stats.csv";

pub fn run(common: &Common, args: &SynthArgs) -> Result<Outcome, CliError> {
    let d = AffineSamplingConfig::default();
    let defaults = [
        ("input", String::new()),
        ("output", String::new()),
        ("seed", "0".into()),
        ("workers", "0".into()),
        ("max_rotation", d.max_rotation.to_string()),
        ("scale_min", d.scale_range.0.to_string()),
        ("scale_max", d.scale_range.1.to_string()),
        ("max_translation", d.max_translation_frac.to_string()),
        ("max_shear", d.max_shear.to_string()),
        ("min_positive", MIN_POSITIVE_PIXELS.to_string()),
    ];
    let defaults: Vec<(&str, &str)> = defaults.iter().map(|(k, v)| (*k, v.as_str())).collect();
    let s = Settings::resolve(
        "synth",
        &defaults,
        common.config.as_deref(),
        &[
            ("input", args.input.as_ref().map(|p| p.display().to_string())),
            ("output", common.output_str()),
            ("seed", common.seed.map(|v| v.to_string())),
            ("workers", common.workers.map(|v| v.to_string())),
            ("max_rotation", args.max_rotation.map(|v| v.to_string())),
            ("scale_min", args.scale_min.map(|v| v.to_string())),
            ("scale_max", args.scale_max.map(|v| v.to_string())),
            ("max_translation", args.max_translation.map(|v| v.to_string())),
            ("max_shear", args.max_shear.map(|v| v.to_string())),
            ("min_positive", args.min_positive.map(|v| v.to_string())),
        ],
    )?;
    s.apply_workers()?;
    let input = s.required_path("input")?;
    let output = s.required_path("output")?;
    let affine = AffineSamplingConfig {
        max_rotation: s.get("max_rotation")?,
        scale_range: (s.get("scale_min")?, s.get("scale_max")?),
        max_translation_frac: s.get("max_translation")?,
        max_shear: s.get("max_shear")?,
        seed: s.get("seed")?,
    };
    affine.validate()?;
    let min_positive: usize = s.get("min_positive")?;

    let entries = match manifest_or_empty(&input)? {
        Some(entries) => entries,
        None => {
            log::warn!("{} holds no corpus; writing an empty one", input.display());
            Vec::new()
        }
    };
    ensure_dir(&output)?;
    s.write_sidecar(&output)?;

    let results: Vec<Result<Option<SampleCounts>, String>> = entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| synth_one(&input, &output, entry, index as u64, &affine, min_positive))
        .collect();

    let mut outcome = Outcome::default();
    let mut counts = Vec::new();
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok(Some(c)) => counts.push(c),
            Ok(None) => {}
            Err(msg) => {
                log::error!("{}: {msg}", entry.stem);
                outcome.failures += 1;
            }
        }
    }
    let table = StatsTable::from_counts(&counts);
    let stats = output.join(STATS_FILE);
    fs::write(&stats, table.to_csv()).map_err(|e| CliError::Failed(format!("{}: {e}", stats.display())))?;
    log::info!(
        "synthesized {} of {} pairs into {}",
        counts.len(),
        entries.len(),
        output.display()
    );
    Ok(outcome)
}

/// `None` for an empty directory without a manifest.
fn manifest_or_empty(input: &Path) -> Result<Option<Vec<ManifestEntry>>, CliError> {
    if input.join(MANIFEST_FILE).exists() {
        return Ok(Some(read_manifest(input)?));
    }
    let empty = fs::read_dir(input)
        .map_err(|e| CliError::Failed(format!("{}: {e}", input.display())))?
        .next()
        .is_none();
    if empty {
        Ok(None)
    } else {
        Err(CliError::Failed(format!("{}: no {MANIFEST_FILE}", input.display())))
    }
}

fn synth_one(
    input: &Path,
    output: &Path,
    entry: &ManifestEntry,
    index: u64,
    config: &AffineSamplingConfig,
    min_positive: usize,
) -> Result<Option<SampleCounts>, String> {
    let pair = load_registered_pair(input, entry).map_err(|e| e.to_string())?;
    let (h, w, _) = pair.pre_image.dims();
    let params = sample_affine_params(config, index, h, w).map_err(|e| e.to_string())?;
    let affine = params.to_transform(h, w);
    let sample = synthesize_pair(&pair, &affine).map_err(|e| e.to_string())?;
    let positives = sample.valid_positives();
    if positives < min_positive {
        log::info!("{}: filtered ({positives} changed pixels < {min_positive})", entry.stem);
        return Ok(None);
    }
    let meta = SampleMeta {
        id: sample.id.clone(),
        event: entry.event.clone(),
        split: entry.split.clone(),
        seed: config.seed,
        index,
        height: h,
        width: w,
        affine: affine.matrix,
        params: Some(params),
    };
    write_sample(output, &sample, &meta).map_err(|e| e.to_string())?;
    Ok(Some(SampleCounts {
        event: entry.event.clone(),
        split: entry.split.clone(),
        positives: positives as u64,
        negatives: sample.valid_negatives() as u64,
    }))
}
