use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::RasterImage;
use crate::scalar::Real;

/// `RF32`, then u32 height, width, channels, then row-major LE `f32` data.
pub const RAW_MAGIC: &[u8; 4] = b"RF32";

pub fn encode_raw_raster<T: Real>(raster: &RasterImage<T>) -> Vec<u8> {
    let (h, w, c) = raster.dims();
    let mut out = Vec::with_capacity(16 + 4 * h * w * c);
    out.extend_from_slice(RAW_MAGIC);
    for d in [h, w, c] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in raster.data() {
        out.extend_from_slice(&(v.widen() as f32).to_le_bytes());
    }
    out
}

pub fn decode_raw_raster(bytes: &[u8]) -> Result<RasterImage<f32>> {
    if bytes.len() < 16 {
        return Err(Error::Format {
            offset: bytes.len(),
            message: "truncated raster header".into(),
        });
    }
    if &bytes[0..4] != RAW_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad raster magic".into(),
        });
    }
    let dim = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (h, w, c) = (dim(4), dim(8), dim(12));
    let expected = 16 + 4 * h * w * c;
    if bytes.len() != expected {
        return Err(Error::Format {
            offset: bytes.len().min(expected),
            message: format!("expected {expected} bytes, found {}", bytes.len()),
        });
    }
    let data = bytes[16..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    RasterImage::from_vec(h, w, c, data)
}

pub fn write_raw_raster<T: Real>(path: &Path, raster: &RasterImage<T>) -> Result<()> {
    std::fs::write(path, encode_raw_raster(raster)).map_err(|e| Error::io(path, e))
}

pub fn read_raw_raster(path: &Path) -> Result<RasterImage<f32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw_raster(&bytes).map_err(|e| Error::file(path, e.to_string()))
}
