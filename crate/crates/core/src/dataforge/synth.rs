use rayon::prelude::*;

use crate::dataforge::{derive_change_map, BuildingPolygon};
use crate::error::{Error, Result};
use crate::numerics::{bilinear_sample_into, AffineTransform2D, BinaryMask, FlowField, RasterImage};

/// A registered pre/post pair with its building annotations.
#[derive(Debug, Clone)]
pub struct RegisteredPair {
    pub id: String,
    pub event_name: String,
    pub pre_image: RasterImage<f32>,
    pub post_image: RasterImage<f32>,
    pub pre_buildings: Vec<BuildingPolygon>,
    pub post_buildings: Vec<BuildingPolygon>,
}

impl RegisteredPair {
    pub fn validate(&self) -> Result<()> {
        if self.pre_image.dims() != self.post_image.dims() {
            return Err(Error::InvalidShape(format!(
                "pair {}: pre {:?} vs post {:?}",
                self.id,
                self.pre_image.dims(),
                self.post_image.dims()
            )));
        }
        Ok(())
    }
}

/// An unregistered training/evaluation sample with its annotations.
#[derive(Debug, Clone)]
pub struct E2ESample {
    pub id: String,
    pub event_name: String,
    pub source_image: RasterImage<f32>,
    pub target_image: RasterImage<f32>,
    pub gt_flow: FlowField<f32>,
    pub validity_mask: BinaryMask,
    pub change_map: BinaryMask,
    pub affine: AffineTransform2D<f64>,
}

impl E2ESample {
    /// Changed pixels inside the validity mask.
    pub fn valid_positives(&self) -> usize {
        count_and(&self.change_map, &self.validity_mask, true)
    }

    pub fn valid_negatives(&self) -> usize {
        count_and(&self.change_map, &self.validity_mask, false)
    }
}

fn count_and(labels: &BinaryMask, valid: &BinaryMask, want: bool) -> usize {
    labels
        .values()
        .iter()
        .zip(valid.values())
        .filter(|&(&l, &v)| v == 1 && (l == 1) == want)
        .count()
}

/// Ground-truth flow of a resampled source: `w(x) = A⁻¹(x) − x`, evaluated
/// in `f64` and stored as `f32`.
pub fn affine_flow(inverse: &AffineTransform2D<f64>, height: usize, width: usize) -> FlowField<f32> {
    FlowField::from_fn(height, width, |y, x| {
        let (sx, sy) = inverse.apply(x as f64, y as f64);
        ((sx - x as f64) as f32, (sy - y as f64) as f32)
    })
}

/// `1` where `A⁻¹(x)` lands inside `[0, W−1] × [0, H−1]`.
pub fn affine_validity(inverse: &AffineTransform2D<f64>, height: usize, width: usize) -> BinaryMask {
    let (xmax, ymax) = (width as f64 - 1.0, height as f64 - 1.0);
    BinaryMask::from_fn(height, width, |y, x| {
        let (sx, sy) = inverse.apply(x as f64, y as f64);
        (0.0..=xmax).contains(&sx) && (0.0..=ymax).contains(&sy)
    })
}

/// Resamples `image` so that `out(y) = image(A(y))`, zero outside.
pub fn resample_affine(image: &RasterImage<f32>, affine: &AffineTransform2D<f64>) -> RasterImage<f32> {
    let (h, w, c) = image.dims();
    let mut out = RasterImage::zeros(h, w, c);
    if out.is_empty() {
        return out;
    }
    out.data_mut()
        .par_chunks_mut(w * c)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..w {
                let (sx, sy) = affine.apply(x as f64, y as f64);
                bilinear_sample_into(image, sx as f32, sy as f32, &mut row[x * c..(x + 1) * c]);
            }
        });
    out
}

/// Builds an unregistered sample from a registered pair.
///
/// The pre-event image is resampled through `affine` (unregistered source
/// coordinates to registered coordinates); the post-event image is the
/// target. Warping the source by the returned flow recovers the registered
/// pre-event image wherever the validity mask is set.
pub fn synthesize_pair(pair: &RegisteredPair, affine: &AffineTransform2D<f64>) -> Result<E2ESample> {
    pair.validate()?;
    let inverse = affine.invert()?;
    let (h, w, _) = pair.pre_image.dims();
    Ok(E2ESample {
        id: pair.id.clone(),
        event_name: pair.event_name.clone(),
        source_image: resample_affine(&pair.pre_image, affine),
        target_image: pair.post_image.clone(),
        gt_flow: affine_flow(&inverse, h, w),
        validity_mask: affine_validity(&inverse, h, w),
        change_map: derive_change_map(&pair.pre_buildings, &pair.post_buildings, h, w),
        affine: *affine,
    })
}
