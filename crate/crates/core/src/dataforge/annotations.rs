//! Per-image building annotations: `{"buildings":[{"wkt": ..., "damage": ...}]}`.

use serde::{Deserialize, Serialize};

use crate::dataforge::{parse_wkt_polygon, BuildingPolygon, DamageClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AnnotationDoc {
    buildings: Vec<AnnotationEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AnnotationEntry {
    wkt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    damage: Option<String>,
}

/// Which image of the pair an annotation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Epoch {
    Pre,
    Post,
}

/// Parses an annotation document. Missing damage fields read as
/// `no-damage`; pre-event buildings must not carry any other class.
pub fn parse_annotations(text: &str, epoch: Epoch) -> Result<Vec<BuildingPolygon>> {
    let doc: AnnotationDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        offset: json_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    doc.buildings
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let vertices = parse_wkt_polygon(&entry.wkt).map_err(|e| match e {
                Error::Parse { offset, message } => Error::Parse {
                    offset,
                    message: format!("building {i}: {message}"),
                },
                other => other,
            })?;
            let damage = match &entry.damage {
                None => DamageClass::NoDamage,
                Some(s) => s.parse()?,
            };
            if epoch == Epoch::Pre && damage != DamageClass::NoDamage {
                return Err(Error::InvalidArgument(format!(
                    "building {i}: pre-event buildings must be no-damage, found {}",
                    damage.as_str()
                )));
            }
            BuildingPolygon::new(vertices, damage)
        })
        .collect()
}

fn json_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    start + column.saturating_sub(1)
}

/// Closed-ring WKT for a polygon.
pub fn polygon_to_wkt(polygon: &BuildingPolygon) -> String {
    let mut ring: Vec<String> = polygon.vertices.iter().map(|(x, y)| format!("{x} {y}")).collect();
    if let Some(first) = ring.first().cloned() {
        ring.push(first);
    }
    format!("POLYGON (({}))", ring.join(", "))
}

pub fn annotations_to_json(polygons: &[BuildingPolygon]) -> String {
    let doc = AnnotationDoc {
        buildings: polygons
            .iter()
            .map(|p| AnnotationEntry {
                wkt: polygon_to_wkt(p),
                damage: Some(p.damage.as_str().to_string()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("annotation serialization") + "\n"
}
