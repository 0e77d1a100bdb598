//! Directory layouts of input (registered) and synthesized corpora.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataforge::{
    annotations_to_json, parse_annotations, AffineParams, E2ESample, Epoch, RegisteredPair,
};
use crate::error::{Error, Result};
use crate::io::{read_flo, read_mask_png, read_png, write_flo, write_mask_png, write_png};
use crate::numerics::AffineTransform2D;

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stem: String,
    pub event: String,
    pub split: String,
}

/// Reads `manifest.csv` (`stem,event,split`), sorted by stem.
pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST_FILE);
    let mut reader = csv::Reader::from_path(&path).map_err(|e| Error::file(&path, e.to_string()))?;
    let mut entries = Vec::new();
    for row in reader.deserialize() {
        let entry: ManifestEntry = row.map_err(|e| Error::file(&path, e.to_string()))?;
        entries.push(entry);
    }
    entries.sort_by(|a, b| a.stem.cmp(&b.stem));
    if let Some(w) = entries.windows(2).find(|w| w[0].stem == w[1].stem) {
        return Err(Error::file(&path, format!("duplicate stem `{}`", w[0].stem)));
    }
    Ok(entries)
}

pub fn write_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = String::from("stem,event,split\n");
    for e in entries {
        text.push_str(&format!("{},{},{}\n", e.stem, e.event, e.split));
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads `{stem}_pre.png`, `{stem}_post.png`, `{stem}_pre.json`, `{stem}_post.json`.
pub fn load_registered_pair(dir: &Path, entry: &ManifestEntry) -> Result<RegisteredPair> {
    let p = |suffix: &str| dir.join(format!("{}_{suffix}", entry.stem));
    let annotations = |path: PathBuf, epoch| -> Result<_> {
        parse_annotations(&read_text(&path)?, epoch).map_err(|e| Error::file(&path, e.to_string()))
    };
    let pair = RegisteredPair {
        id: entry.stem.clone(),
        event_name: entry.event.clone(),
        pre_image: read_png(&p("pre.png"))?,
        post_image: read_png(&p("post.png"))?,
        pre_buildings: annotations(p("pre.json"), Epoch::Pre)?,
        post_buildings: annotations(p("post.json"), Epoch::Post)?,
    };
    pair.validate()?;
    Ok(pair)
}

pub fn write_registered_pair(dir: &Path, pair: &RegisteredPair) -> Result<()> {
    let p = |suffix: &str| dir.join(format!("{}_{suffix}", pair.id));
    write_png(&p("pre.png"), &pair.pre_image)?;
    write_png(&p("post.png"), &pair.post_image)?;
    write_text(&p("pre.json"), &annotations_to_json(&pair.pre_buildings))?;
    write_text(&p("post.json"), &annotations_to_json(&pair.post_buildings))
}

/// Sidecar describing how a synthesized sample was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub id: String,
    pub event: String,
    pub split: String,
    pub seed: u64,
    pub index: u64,
    pub height: usize,
    pub width: usize,
    pub affine: [[f64; 3]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<AffineParams>,
}

/// File names of one synthesized sample.
#[derive(Debug, Clone)]
pub struct SamplePaths {
    pub source: PathBuf,
    pub target: PathBuf,
    pub flow: PathBuf,
    pub mask: PathBuf,
    pub change: PathBuf,
    pub meta: PathBuf,
}

impl SamplePaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        let p = |suffix: &str| dir.join(format!("{stem}_{suffix}"));
        Self {
            source: p("source.png"),
            target: p("target.png"),
            flow: p("flow.flo"),
            mask: p("mask.png"),
            change: p("change.png"),
            meta: p("meta.json"),
        }
    }

    pub fn all(&self) -> [&Path; 6] {
        [&self.source, &self.target, &self.flow, &self.mask, &self.change, &self.meta]
    }
}

/// Writes every file of a sample; on failure the partial files are removed.
pub fn write_sample(dir: &Path, sample: &E2ESample, meta: &SampleMeta) -> Result<()> {
    let paths = SamplePaths::new(dir, &sample.id);
    let result = (|| {
        write_png(&paths.source, &sample.source_image)?;
        write_png(&paths.target, &sample.target_image)?;
        write_flo(&paths.flow, &sample.gt_flow)?;
        write_mask_png(&paths.mask, &sample.validity_mask)?;
        write_mask_png(&paths.change, &sample.change_map)?;
        let json = serde_json::to_string_pretty(meta).expect("meta serialization") + "\n";
        write_text(&paths.meta, &json)
    })();
    if result.is_err() {
        for p in paths.all() {
            let _ = fs::remove_file(p);
        }
    }
    result
}

pub fn read_sample_meta(dir: &Path, stem: &str) -> Result<SampleMeta> {
    let path = SamplePaths::new(dir, stem).meta;
    serde_json::from_str(&read_text(&path)?).map_err(|e| Error::file(&path, e.to_string()))
}

pub fn read_sample(dir: &Path, stem: &str) -> Result<(E2ESample, SampleMeta)> {
    let paths = SamplePaths::new(dir, stem);
    let meta = read_sample_meta(dir, stem)?;
    let sample = E2ESample {
        id: meta.id.clone(),
        event_name: meta.event.clone(),
        source_image: read_png(&paths.source)?,
        target_image: read_png(&paths.target)?,
        gt_flow: read_flo(&paths.flow)?,
        validity_mask: read_mask_png(&paths.mask)?,
        change_map: read_mask_png(&paths.change)?,
        affine: AffineTransform2D::new(meta.affine),
    };
    let dims = (meta.height, meta.width);
    let consistent = (sample.source_image.height(), sample.source_image.width()) == dims
        && (sample.target_image.height(), sample.target_image.width()) == dims
        && sample.gt_flow.dims() == dims
        && sample.validity_mask.dims() == dims
        && sample.change_map.dims() == dims;
    if !consistent {
        return Err(Error::file(&paths.meta, "sample rasters disagree with the recorded size"));
    }
    Ok((sample, meta))
}

/// Stems of every `{stem}_<suffix>` file in `dir`, sorted.
pub fn list_stems(dir: &Path, suffix: &str) -> Result<Vec<String>> {
    let mut stems = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if let Some(stem) = name.to_str().and_then(|n| n.strip_suffix(suffix)).and_then(|n| n.strip_suffix('_')) {
            stems.push(stem.to_string());
        }
    }
    stems.sort();
    Ok(stems)
}

/// Stems of the synthesized samples in `dir`.
pub fn list_samples(dir: &Path) -> Result<Vec<String>> {
    list_stems(dir, "meta.json")
}
