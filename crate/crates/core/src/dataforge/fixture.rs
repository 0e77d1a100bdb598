//! Procedurally generated registered pairs: smooth terrain with rectangular
//! "buildings" that survive, get destroyed, disappear or appear.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataforge::{rasterize_polygons, BuildingPolygon, DamageClass, ManifestEntry, RegisteredPair};
use crate::numerics::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    /// Several buildings with mixed outcomes; hundreds of changed pixels.
    Busy,
    /// A single new 5×10 building: exactly 50 changed pixels.
    Quiet,
}

fn terrain(size: usize, rng: &mut ChaCha8Rng) -> RasterImage<f32> {
    let phases: Vec<f32> = (0..9).map(|_| rng.gen_range(0.0..std::f32::consts::TAU)).collect();
    let n = size as f32;
    RasterImage::from_fn(size, size, 3, |y, x, c| {
        let (fx, fy) = (x as f32 / n, y as f32 / n);
        let p = &phases[c * 3..c * 3 + 3];
        0.45 + 0.12 * (5.0 * fx + p[0]).sin() * (3.0 * fy + p[1]).cos()
            + 0.08 * (4.0 * (fx + fy) + p[2]).sin()
            + 0.04 * c as f32
    })
}

fn paint(image: &mut RasterImage<f32>, polygon: &BuildingPolygon, color: impl Fn(usize, usize, usize) -> f32) {
    let (h, w, ch) = image.dims();
    let map = rasterize_polygons(std::slice::from_ref(polygon), h, w);
    for y in 0..h {
        for x in 0..w {
            if map.get(y, x) != 0 {
                for c in 0..ch {
                    image.set(y, x, c, color(y, x, c));
                }
            }
        }
    }
}

/// Builds one registered pair of `size × size` pixels.
pub fn fixture_pair(id: &str, event: &str, size: usize, seed: u64, kind: FixtureKind) -> RegisteredPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = terrain(size, &mut rng);
    let mut pre = background.clone();
    let mut post = background.clone();
    let mut pre_buildings = Vec::new();
    let mut post_buildings = Vec::new();

    match kind {
        FixtureKind::Quiet => {
            let x0 = (size / 2) as f64;
            let y0 = (size / 2) as f64;
            let b = BuildingPolygon::rect(x0, y0, x0 + 10.0, y0 + 5.0, DamageClass::NoDamage);
            paint(&mut post, &b, |_, _, c| [0.85, 0.8, 0.7][c % 3]);
            post_buildings.push(b);
        }
        FixtureKind::Busy => {
            let cells = 4;
            let cell = size / cells;
            let mut slot = 0;
            for gy in 0..cells {
                for gx in 0..cells {
                    slot += 1;
                    if rng.gen_bool(0.35) {
                        continue;
                    }
                    let bw = rng.gen_range(cell / 3..=cell * 2 / 3) as f64;
                    let bh = rng.gen_range(cell / 3..=cell * 2 / 3) as f64;
                    let x0 = (gx * cell) as f64 + rng.gen_range(1.0..(cell as f64 - bw - 1.0).max(1.5));
                    let y0 = (gy * cell) as f64 + rng.gen_range(1.0..(cell as f64 - bh - 1.0).max(1.5));
                    let roof = [rng.gen_range(0.6..0.95f32), rng.gen_range(0.5..0.9f32), rng.gen_range(0.4..0.8f32)];
                    let footprint = BuildingPolygon::rect(x0, y0, x0 + bw, y0 + bh, DamageClass::NoDamage);
                    // 0: intact, 1: damaged, 2: destroyed, 3: removed, 4: new
                    let outcome = slot % 5;
                    let roof_color = move |_: usize, _: usize, c: usize| roof[c];
                    let rubble = |y: usize, x: usize, c: usize| {
                        0.2 + 0.05 * c as f32 + 0.08 * (((x * 7 + y * 13) % 5) as f32 / 4.0)
                    };
                    match outcome {
                        0 | 1 => {
                            paint(&mut pre, &footprint, roof_color);
                            paint(&mut post, &footprint, roof_color);
                            pre_buildings.push(footprint.clone());
                            let damage = if outcome == 0 { DamageClass::NoDamage } else { DamageClass::MinorDamage };
                            post_buildings.push(BuildingPolygon { damage, ..footprint });
                        }
                        2 => {
                            paint(&mut pre, &footprint, roof_color);
                            paint(&mut post, &footprint, rubble);
                            pre_buildings.push(footprint.clone());
                            post_buildings.push(BuildingPolygon {
                                damage: DamageClass::Destroyed,
                                ..footprint
                            });
                        }
                        3 => {
                            paint(&mut pre, &footprint, roof_color);
                            pre_buildings.push(footprint);
                        }
                        _ => {
                            paint(&mut post, &footprint, roof_color);
                            post_buildings.push(footprint);
                        }
                    }
                }
            }
        }
    }

    RegisteredPair {
        id: id.to_string(),
        event_name: event.to_string(),
        pre_image: pre,
        post_image: post,
        pre_buildings,
        post_buildings,
    }
}

/// The bundled three-pair corpus: two busy pairs and one quiet pair that
/// the positive-count filter drops.
pub fn fixture_corpus(size: usize, seed: u64) -> Vec<(ManifestEntry, RegisteredPair)> {
    let specs = [
        ("fixture_000", "synthetic-storm", "train", FixtureKind::Busy),
        ("fixture_001", "synthetic-storm", "test", FixtureKind::Busy),
        ("fixture_002", "synthetic-flood", "test", FixtureKind::Quiet),
    ];
    specs
        .iter()
        .enumerate()
        .map(|(i, &(stem, event, split, kind))| {
            let pair = fixture_pair(stem, event, size, seed.wrapping_add(i as u64), kind);
            let entry = ManifestEntry {
                stem: stem.into(),
                event: event.into(),
                split: split.into(),
            };
            (entry, pair)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataforge::derive_change_map;

    #[test]
    fn quiet_pair_has_fifty_changes() {
        let p = fixture_pair("q", "e", 64, 1, FixtureKind::Quiet);
        assert_eq!(derive_change_map(&p.pre_buildings, &p.post_buildings, 64, 64).count_ones(), 50);
    }

    #[test]
    fn busy_pair_has_changes_and_is_deterministic() {
        let a = fixture_pair("b", "e", 128, 7, FixtureKind::Busy);
        let b = fixture_pair("b", "e", 128, 7, FixtureKind::Busy);
        assert_eq!(a.pre_image, b.pre_image);
        assert_eq!(a.post_buildings, b.post_buildings);
        let changed = derive_change_map(&a.pre_buildings, &a.post_buildings, 128, 128).count_ones();
        assert!(changed > 300, "{changed}");
        assert!(a.pre_image.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn unchanged_pixels_match_between_epochs() {
        let p = fixture_pair("b", "e", 96, 3, FixtureKind::Busy);
        let change = derive_change_map(&p.pre_buildings, &p.post_buildings, 96, 96);
        for y in 0..96 {
            for x in 0..96 {
                if !change.get(y, x) {
                    assert_eq!(p.pre_image.pixel(y, x), p.post_image.pixel(y, x), "({y},{x})");
                }
            }
        }
    }
}
