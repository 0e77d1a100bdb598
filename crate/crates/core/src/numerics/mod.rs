//! Dense rasters, flow fields, bilinear resampling and 2D affine algebra.

mod affine;
mod flow;
mod raster;
mod sample;

pub use affine::AffineTransform2D;
pub use flow::{upsample_flow, FlowField};
pub use raster::{BinaryMask, RasterImage};
pub use sample::{bilinear_sample, bilinear_sample_into, upsample_bilinear, warp_by_flow};
