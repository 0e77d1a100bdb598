//! Corpus synthesis: change labels from building footprints of registered
//! pairs, random viewpoint perturbations with ground-truth flow and validity
//! masks, filtering and corpus statistics.

mod affine_sampling;
mod annotations;
mod corpus;
mod fixture;
mod layout;
mod polygon;
mod synth;
mod wkt;

pub use affine_sampling::{sample_affine, sample_affine_params, AffineParams, AffineSamplingConfig};
pub use annotations::{annotations_to_json, parse_annotations, polygon_to_wkt, Epoch};
pub use corpus::{dataset_stats, filter_pairs, Counts, SampleCounts, StatsTable, ALL_EVENTS, ALL_SPLITS};
pub use fixture::{fixture_corpus, fixture_pair, FixtureKind};
pub use layout::{
    list_samples, list_stems, load_registered_pair, read_manifest, read_sample, read_sample_meta,
    write_manifest, write_registered_pair, write_sample, ManifestEntry, SampleMeta, SamplePaths,
    MANIFEST_FILE,
};
pub use polygon::{derive_change_map, rasterize_polygons, BuildingPolygon, DamageClass, LabelMap};
pub use synth::{affine_flow, affine_validity, resample_affine, synthesize_pair, E2ESample, RegisteredPair};
pub use wkt::parse_wkt_polygon;

/// Minimum number of valid changed pixels a sample needs to be kept.
pub const MIN_POSITIVE_PIXELS: usize = 100;
