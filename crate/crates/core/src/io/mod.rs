//! On-disk formats: 8-bit PNG imagery and masks, Middlebury `.flo` flow
//! files, and a raw little-endian `f32` raster container.

mod flo;
mod png;
mod raw;

pub use flo::{decode_flo, encode_flo, read_flo, write_flo, FLO_TAG};
pub use png::{read_mask_png, read_png, write_mask_png, write_png};
pub use raw::{decode_raw_raster, encode_raw_raster, read_raw_raster, write_raw_raster, RAW_MAGIC};
