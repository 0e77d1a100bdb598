use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, RgbImage};

use crate::error::{Error, Result};
use crate::numerics::{BinaryMask, RasterImage};
use crate::scalar::Real;

/// Loads an 8-bit grayscale or RGB PNG as a raster in `[0, 1]` (`v / 255`).
pub fn read_png(path: &Path) -> Result<RasterImage<f32>> {
    let img = image::open(path).map_err(|e| Error::file(path, e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, bytes) = match img {
        DynamicImage::ImageLuma8(buf) => (1, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => (3, buf.into_raw()),
        other => {
            return Err(Error::file(
                path,
                format!("unsupported PNG color type {:?}", other.color()),
            ))
        }
    };
    let data = bytes.into_iter().map(|b| b as f32 / 255.0).collect();
    RasterImage::from_vec(h, w, channels, data)
}

fn quantize<T: Real>(v: T) -> u8 {
    let v = v.widen();
    if v.is_nan() {
        0
    } else {
        (v.clamp(0.0, 1.0) * 255.0).round() as u8
    }
}

/// Writes a 1- or 3-channel raster as 8-bit PNG, clamping to `[0, 1]`.
pub fn write_png<T: Real>(path: &Path, raster: &RasterImage<T>) -> Result<()> {
    let (h, w, c) = raster.dims();
    let bytes: Vec<u8> = raster.data().iter().map(|&v| quantize(v)).collect();
    let (w32, h32) = (w as u32, h as u32);
    let result = match c {
        1 => GrayImage::from_raw(w32, h32, bytes).map(|b| b.save(path)),
        3 => RgbImage::from_raw(w32, h32, bytes).map(|b| b.save(path)),
        _ => {
            return Err(Error::InvalidShape(format!(
                "PNG output needs 1 or 3 channels, got {c}"
            )))
        }
    };
    match result {
        Some(Ok(())) => Ok(()),
        Some(Err(e)) => Err(Error::file(path, e.to_string())),
        None => Err(Error::InvalidShape("raster buffer size".into())),
    }
}

/// Masks are stored as grayscale 0/255.
pub fn write_mask_png(path: &Path, mask: &BinaryMask) -> Result<()> {
    let bytes: Vec<u8> = mask.values().iter().map(|&v| v * 255).collect();
    let buf: GrayImage = ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, bytes)
        .ok_or_else(|| Error::InvalidShape("mask buffer size".into()))?;
    buf.save(path).map_err(|e| Error::file(path, e.to_string()))
}

/// Reads a 0/255 grayscale mask; any other gray level is rejected.
pub fn read_mask_png(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path).map_err(|e| Error::file(path, e.to_string()))?;
    let DynamicImage::ImageLuma8(buf) = img else {
        return Err(Error::file(path, "mask PNG must be 8-bit grayscale"));
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let mut values = Vec::with_capacity(w * h);
    for (i, &b) in buf.as_raw().iter().enumerate() {
        match b {
            0 => values.push(0),
            255 => values.push(1),
            other => {
                return Err(Error::file(
                    path,
                    format!("mask pixel {i} has gray level {other}, expected 0 or 255"),
                ))
            }
        }
    }
    BinaryMask::from_vec(h, w, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgb_round_trip_is_exact_on_8bit_levels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.png");
        let img = RasterImage::<f32>::from_fn(5, 7, 3, |y, x, c| ((y * 37 + x * 11 + c * 5) % 256) as f32 / 255.0);
        write_png(&p, &img).unwrap();
        let back = read_png(&p).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn mask_round_trip_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
        let m = BinaryMask::from_fn(9, 4, |y, x| (y + x) % 3 == 0);
        write_mask_png(&a, &m).unwrap();
        let back = read_mask_png(&a).unwrap();
        assert_eq!(back, m);
        write_mask_png(&b, &back).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn mask_rejects_gray_levels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.png");
        write_png(&p, &RasterImage::<f32>::filled(2, 2, 1, 0.5)).unwrap();
        assert!(read_mask_png(&p).is_err());
    }
}
