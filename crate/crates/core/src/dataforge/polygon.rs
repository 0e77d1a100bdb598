use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DamageClass {
    NoDamage,
    MinorDamage,
    MajorDamage,
    Destroyed,
}

impl DamageClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DamageClass::NoDamage => "no-damage",
            DamageClass::MinorDamage => "minor-damage",
            DamageClass::MajorDamage => "major-damage",
            DamageClass::Destroyed => "destroyed",
        }
    }
}

impl std::str::FromStr for DamageClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-damage" => Ok(DamageClass::NoDamage),
            "minor-damage" => Ok(DamageClass::MinorDamage),
            "major-damage" => Ok(DamageClass::MajorDamage),
            "destroyed" => Ok(DamageClass::Destroyed),
            other => Err(Error::InvalidArgument(format!("unknown damage class `{other}`"))),
        }
    }
}

/// Building footprint in pixel coordinates; the ring closes implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingPolygon {
    pub vertices: Vec<(f64, f64)>,
    pub damage: DamageClass,
}

impl BuildingPolygon {
    pub fn new(vertices: Vec<(f64, f64)>, damage: DamageClass) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon with {} vertices",
                vertices.len()
            )));
        }
        Ok(Self { vertices, damage })
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64, damage: DamageClass) -> Self {
        Self {
            vertices: vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
            damage,
        }
    }

    /// Even-odd containment, counting ring crossings of the ray towards +x.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let mut inside = false;
        let n = self.vertices.len();
        for i in 0..n {
            let (xi, yi) = self.vertices[i];
            let (xj, yj) = self.vertices[(i + n - 1) % n];
            if (yi > y) != (yj > y) && x < edge_crossing_x(xi, yi, xj, yj, y) {
                inside = !inside;
            }
        }
        inside
    }
}

#[inline]
fn edge_crossing_x(xi: f64, yi: f64, xj: f64, yj: f64, y: f64) -> f64 {
    (xj - xi) * (y - yi) / (yj - yi) + xi
}

/// Per-pixel polygon index map: 0 is background, `k` is `polygons[k - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<u32>,
}

impl LabelMap {
    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn footprint(&self) -> BinaryMask {
        BinaryMask::from_fn(self.height, self.width, |y, x| self.get(y, x) != 0)
    }
}

/// Scanline rasterization on pixel centres `(x + 0.5, y + 0.5)` with the
/// even-odd rule. Later polygons overwrite earlier ones.
pub fn rasterize_polygons(polygons: &[BuildingPolygon], height: usize, width: usize) -> LabelMap {
    let mut labels = vec![0u32; height * width];
    let mut crossings: Vec<f64> = Vec::new();
    for (idx, poly) in polygons.iter().enumerate() {
        let label = idx as u32 + 1;
        let n = poly.vertices.len();
        if n < 3 {
            continue;
        }
        let (ymin, ymax) = poly
            .vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
        let row_lo = (ymin - 0.5).ceil().max(0.0) as usize;
        let row_hi = ((ymax - 0.5).floor() + 1.0).clamp(0.0, height as f64) as usize;
        for row in row_lo..row_hi {
            let yc = row as f64 + 0.5;
            crossings.clear();
            for i in 0..n {
                let (xi, yi) = poly.vertices[i];
                let (xj, yj) = poly.vertices[(i + n - 1) % n];
                if (yi > yc) != (yj > yc) {
                    crossings.push(edge_crossing_x(xi, yi, xj, yj, yc));
                }
            }
            if crossings.is_empty() {
                continue;
            }
            crossings.sort_by(|a, b| a.total_cmp(b));
            // A centre xc is inside when an odd number of crossings lie
            // strictly to its right; walk the row with a moving cut.
            let mut right = 0usize;
            let total = crossings.len();
            let first = ((crossings[0] - 0.5).floor().max(0.0) as usize).min(width);
            let last = ((crossings[total - 1] + 0.5).ceil().max(0.0) as usize).min(width);
            for col in first..last {
                let xc = col as f64 + 0.5;
                while right < total && crossings[right] <= xc {
                    right += 1;
                }
                if (total - right) % 2 == 1 {
                    labels[row * width + col] = label;
                }
            }
        }
    }
    LabelMap {
        height,
        width,
        labels,
    }
}

/// Binary change labels for a registered pair.
///
/// A pixel is changed when it is covered by exactly one of the two
/// footprints, or by both while the covering post-event building carries a
/// damage class other than `no-damage`.
pub fn derive_change_map(
    pre: &[BuildingPolygon],
    post: &[BuildingPolygon],
    height: usize,
    width: usize,
) -> BinaryMask {
    let pre_map = rasterize_polygons(pre, height, width);
    let post_map = rasterize_polygons(post, height, width);
    BinaryMask::from_fn(height, width, |y, x| {
        let a = pre_map.get(y, x) != 0;
        match post_map.get(y, x) {
            0 => a,
            k => !a || post[k as usize - 1].damage != DamageClass::NoDamage,
        }
    })
}
