use std::path::Path;

use regchange::dataforge::{fixture_corpus, write_manifest, write_registered_pair};
use regchange::net::init_weights;

use crate::config::{ensure_dir, Settings};
use crate::{CliError, Common, Outcome};

/// Writes the procedurally generated registered corpus.
pub fn make_fixture(common: &Common, size: Option<usize>) -> Result<Outcome, CliError> {
    let s = Settings::resolve(
        "make-fixture",
        &[("output", ""), ("seed", "0"), ("size", "64"), ("workers", "0")],
        common.config.as_deref(),
        &[
            ("output", common.output_str()),
            ("seed", common.seed.map(|v| v.to_string())),
            ("size", size.map(|v| v.to_string())),
            ("workers", common.workers.map(|v| v.to_string())),
        ],
    )?;
    let out = s.required_path("output")?;
    let size: usize = s.get("size")?;
    if size == 0 {
        return Err(CliError::Config("`size` must be positive".into()));
    }
    ensure_dir(&out)?;
    let corpus = fixture_corpus(size, s.get("seed")?);
    for (_, pair) in &corpus {
        write_registered_pair(&out, pair)?;
    }
    let entries: Vec<_> = corpus.into_iter().map(|(e, _)| e).collect();
    write_manifest(&out, &entries)?;
    log::info!("wrote {} fixture pairs to {}", entries.len(), out.display());
    Ok(Outcome::default())
}

/// Writes freshly initialized weights and the architecture they follow.
pub fn init(common: &Common, arch: Option<&Path>) -> Result<Outcome, CliError> {
    let s = Settings::resolve(
        "init-weights",
        &[("output", ""), ("seed", "0"), ("arch", ""), ("workers", "0")],
        common.config.as_deref(),
        &[
            ("output", common.output_str()),
            ("seed", common.seed.map(|v| v.to_string())),
            ("arch", arch.map(|p| p.display().to_string())),
            ("workers", common.workers.map(|v| v.to_string())),
        ],
    )?;
    let out = s.required_path("output")?;
    let arch = crate::forward::load_arch(s.path("arch").as_deref())?;
    ensure_dir(&out)?;
    init_weights(s.get("seed")?, &arch).save(&out.join("weights.bin"))?;
    std::fs::write(out.join("arch.txt"), arch.to_text()).map_err(|e| CliError::Failed(e.to_string()))?;
    s.write_sidecar(&out)?;
    Ok(Outcome::default())
}

