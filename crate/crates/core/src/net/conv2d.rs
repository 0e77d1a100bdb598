use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::WeightStore;
use crate::numerics::RasterImage;
use crate::scalar::Real;

/// 3×3 convolution, zero padding 1, with bias.
///
/// Weights are kept widened to `f64` in tap-major order `[ky][kx][out][in]`
/// so the inner loop runs over contiguous input channels.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub stride: usize,
    taps: Vec<f64>,
    bias: Vec<f64>,
}

impl Conv2d {
    /// `weight` is `[out][in][3][3]` row-major.
    pub fn new(in_channels: usize, out_channels: usize, stride: usize, weight: &[f32], bias: &[f32]) -> Result<Self> {
        if weight.len() != out_channels * in_channels * 9 || bias.len() != out_channels || stride == 0 {
            return Err(Error::InvalidShape(format!(
                "conv2d {in_channels}->{out_channels}: weight {} / bias {} values",
                weight.len(),
                bias.len()
            )));
        }
        let mut taps = vec![0.0; weight.len()];
        for o in 0..out_channels {
            for i in 0..in_channels {
                for t in 0..9 {
                    taps[(t * out_channels + o) * in_channels + i] = weight[(o * in_channels + i) * 9 + t] as f64;
                }
            }
        }
        Ok(Self {
            in_channels,
            out_channels,
            stride,
            taps,
            bias: bias.iter().map(|&b| b as f64).collect(),
        })
    }

    /// Reads `{prefix}.weight` and `{prefix}.bias` from a store.
    pub fn from_store(store: &WeightStore, prefix: &str, in_channels: usize, out_channels: usize, stride: usize) -> Result<Self> {
        let w = store.get_shaped(&format!("{prefix}.weight"), &[out_channels, in_channels, 3, 3])?;
        let b = store.get_shaped(&format!("{prefix}.bias"), &[out_channels])?;
        Self::new(in_channels, out_channels, stride, &w.data, &b.data)
    }

    pub fn output_size(&self, h: usize, w: usize) -> (usize, usize) {
        ((h + 2 - 3) / self.stride + 1, (w + 2 - 3) / self.stride + 1)
    }

    pub fn forward<T: Real>(&self, input: &RasterImage<T>) -> Result<RasterImage<T>> {
        let (h, w, c) = input.dims();
        if c != self.in_channels {
            return Err(Error::InvalidShape(format!(
                "conv2d expects {} input channels, got {c}",
                self.in_channels
            )));
        }
        if h == 0 || w == 0 {
            return Err(Error::InvalidShape("conv2d on an empty raster".into()));
        }
        let (oh, ow) = self.output_size(h, w);
        let wide: Vec<f64> = input.data().iter().map(|v| v.widen()).collect();
        let (cin, cout, s) = (self.in_channels, self.out_channels, self.stride);
        let mut out = RasterImage::zeros(oh, ow, cout);
        out.data_mut()
            .par_chunks_mut(ow * cout)
            .enumerate()
            .for_each(|(oy, row)| {
                let mut acc = vec![0.0f64; cout];
                for ox in 0..ow {
                    acc.copy_from_slice(&self.bias);
                    for ky in 0..3 {
                        let iy = (oy * s + ky) as isize - 1;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..3 {
                            let ix = (ox * s + kx) as isize - 1;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let p0 = (iy as usize * w + ix as usize) * cin;
                            let pix = &wide[p0..p0 + cin];
                            let tap = &self.taps[(ky * 3 + kx) * cout * cin..(ky * 3 + kx + 1) * cout * cin];
                            for (a, wrow) in acc.iter_mut().zip(tap.chunks_exact(cin)) {
                                let mut d = 0.0;
                                for (wv, pv) in wrow.iter().zip(pix) {
                                    d += wv * pv;
                                }
                                *a += d;
                            }
                        }
                    }
                    for (o, a) in row[ox * cout..(ox + 1) * cout].iter_mut().zip(&acc) {
                        *o = T::narrow(*a);
                    }
                }
            });
        Ok(out)
    }
}

pub fn relu<T: Real>(x: &RasterImage<T>) -> RasterImage<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// A chain of 3×3 convolutions with ReLU between (not after the last).
#[derive(Debug, Clone)]
pub struct ConvStack {
    pub layers: Vec<Conv2d>,
}

impl ConvStack {
    /// Stride-1 layers `{prefix}.0`, `{prefix}.1`, ... with channel widths
    /// `widths[0] → widths[1] → ...`.
    pub fn from_store(store: &WeightStore, prefix: &str, widths: &[usize]) -> Result<Self> {
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, pair)| Conv2d::from_store(store, &format!("{prefix}.{i}"), pair[0], pair[1], 1))
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    pub fn forward<T: Real>(&self, input: &RasterImage<T>) -> Result<RasterImage<T>> {
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(&x)?;
            if i + 1 < self.layers.len() {
                x = relu(&x);
            }
        }
        Ok(x)
    }
}
