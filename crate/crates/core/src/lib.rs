//! Change detection on unregistered bi-temporal image pairs.
//!
//! * [`numerics`]: rasters, flow fields, bilinear warping, affine algebra.
//! * [`io`]: PNG, Middlebury `.flo` and raw raster files.
//! * [`dataforge`]: change labels from building polygons and synthesis of
//!   unregistered pairs with ground-truth flow and validity masks.
//! * [`net`]: forward pass of the joint registration / change network.
//! * [`metrics`]: neighbourhood-relaxed change metrics and PCK.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix the
//! storage type to `f32`, which is what every file format uses.

pub mod dataforge;
pub mod error;
pub mod io;
pub mod kv;
pub mod metrics;
pub mod net;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Raster = numerics::RasterImage<f32>;
pub type Flow = numerics::FlowField<f32>;
pub type Affine = numerics::AffineTransform2D<f64>;



pub type Corr = net::Corr4D<f32>;
pub type ProbMap = net::ChangeProbMap<f32>;
pub type Pyramid = net::FeaturePyramid<f32>;
