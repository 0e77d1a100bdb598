use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::FlowField;
use crate::scalar::Real;

/// Middlebury sanity tag, the float `202021.25` (bytes "PIEH").
pub const FLO_TAG: f32 = 202021.25;

pub fn encode_flo<T: Real>(flow: &FlowField<T>) -> Vec<u8> {
    let (h, w) = flow.dims();
    let mut out = Vec::with_capacity(12 + 8 * h * w);
    out.extend_from_slice(&FLO_TAG.to_le_bytes());
    out.extend_from_slice(&(w as i32).to_le_bytes());
    out.extend_from_slice(&(h as i32).to_le_bytes());
    for &v in flow.data() {
        out.extend_from_slice(&(v.widen() as f32).to_le_bytes());
    }
    out
}

pub fn decode_flo(bytes: &[u8]) -> Result<FlowField<f32>> {
    let word = |offset: usize| -> Result<[u8; 4]> {
        bytes
            .get(offset..offset + 4)
            .map(|b| b.try_into().unwrap())
            .ok_or(Error::Format {
                offset: bytes.len(),
                message: "truncated .flo header".into(),
            })
    };
    let tag = f32::from_le_bytes(word(0)?);
    if tag != FLO_TAG {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad .flo tag {tag}"),
        });
    }
    let w = i32::from_le_bytes(word(4)?);
    let h = i32::from_le_bytes(word(8)?);
    if w < 0 || h < 0 {
        return Err(Error::Format {
            offset: 4,
            message: format!("negative .flo dimensions {w}x{h}"),
        });
    }
    let (w, h) = (w as usize, h as usize);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(12))
        .ok_or(Error::Format {
            offset: 4,
            message: "dimensions overflow".into(),
        })?;
    if bytes.len() != expected {
        return Err(Error::Format {
            offset: bytes.len().min(expected),
            message: format!("expected {expected} bytes for {w}x{h} flow, found {}", bytes.len()),
        });
    }
    let data = bytes[12..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    FlowField::from_vec(h, w, data)
}

pub fn write_flo<T: Real>(path: &Path, flow: &FlowField<T>) -> Result<()> {
    std::fs::write(path, encode_flo(flow)).map_err(|e| Error::io(path, e))
}

pub fn read_flo(path: &Path) -> Result<FlowField<f32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_flo(&bytes).map_err(|e| Error::file(path, e.to_string()))
}
