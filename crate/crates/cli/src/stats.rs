use std::fs;

use rayon::prelude::*;
use regchange::dataforge::{list_samples, read_sample_meta, SampleCounts, SamplePaths, StatsTable};
use regchange::io::read_mask_png;

use crate::config::{ensure_dir, Settings};
use crate::synth::STATS_FILE;
use crate::{CliError, Common, Outcome};

#[derive(Debug, Default, clap::Args)]
pub struct StatsArgs {
    /// Synthesized corpus directory.
    #[arg(long)]
    pub corpus: Option<std::path::PathBuf>,
}

/// Counts images and valid changed / unchanged pixels per event and split.
/// Without `--output` the table goes to stdout.
pub fn run(common: &Common, args: &StatsArgs) -> Result<Outcome, CliError> {
    let s = Settings::resolve(
        "stats",
        &[("corpus", ""), ("output", ""), ("workers", "0")],
        common.config.as_deref(),
        &[
            ("corpus", args.corpus.as_ref().map(|p| p.display().to_string())),
            ("output", common.output_str()),
            ("workers", common.workers.map(|v| v.to_string())),
        ],
    )?;
    s.apply_workers()?;
    let corpus = s.required_path("corpus")?;
    let stems = list_samples(&corpus)?;
    let results: Vec<_> = stems
        .par_iter()
        .map(|stem| -> regchange::Result<SampleCounts> {
            let meta = read_sample_meta(&corpus, stem)?;
            let paths = SamplePaths::new(&corpus, stem);
            let valid = read_mask_png(&paths.mask)?;
            let change = read_mask_png(&paths.change)?;
            let (mut positives, mut negatives) = (0, 0);
            for (&v, &c) in valid.values().iter().zip(change.values()) {
                if v == 1 {
                    if c == 1 {
                        positives += 1;
                    } else {
                        negatives += 1;
                    }
                }
            }
            Ok(SampleCounts {
                event: meta.event,
                split: meta.split,
                positives,
                negatives,
            })
        })
        .collect();
    let mut outcome = Outcome::default();
    let mut counts = Vec::new();
    for (stem, r) in stems.iter().zip(results) {
        match r {
            Ok(c) => counts.push(c),
            Err(e) => {
                log::error!("{stem}: {e}");
                outcome.failures += 1;
            }
        }
    }
    let csv = StatsTable::from_counts(&counts).to_csv();
    match s.path("output") {
        Some(dir) => {
            ensure_dir(&dir)?;
            s.write_sidecar(&dir)?;
            let path = dir.join(STATS_FILE);
            fs::write(&path, csv).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
        }
        None => print!("{csv}"),
    }
    Ok(outcome)
}
