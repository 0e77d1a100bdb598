use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::{ArchConfig, ConvStack, Corr4D, WeightStore};
use crate::numerics::{FlowField, RasterImage};
use crate::scalar::Real;

/// Expected displacement under a softmax over source positions.
///
/// For each target cell `(i, j)` the scores `c[i, j, ·, ·] / temperature`
/// are softmax-normalized and the flow is `Σ p·(l − j, k − i)`.
pub fn softargmax_flow<T: Real>(c: &Corr4D<T>, temperature: f64) -> Result<FlowField<T>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {temperature}")));
    }
    if c.channels() != 1 {
        return Err(Error::InvalidShape(format!("soft-argmax needs one channel, got {}", c.channels())));
    }
    let [ht, wt, hs, ws] = c.dims();
    let n = hs * ws;
    let mut out = vec![T::zero(); ht * wt * 2];
    if n == 0 {
        return FlowField::from_vec(ht, wt, out);
    }
    out.par_chunks_mut(2).enumerate().for_each(|(idx, uv)| {
        let (i, j) = (idx / wt, idx % wt);
        let slice = &c.data()[idx * n..(idx + 1) * n];
        let max = slice.iter().map(|v| v.widen()).fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut su, mut sv) = (0.0, 0.0, 0.0);
        for (s, v) in slice.iter().enumerate() {
            let e = ((v.widen() - max) / temperature).exp();
            let (k, l) = (s / ws, s % ws);
            z += e;
            su += e * (l as f64 - j as f64);
            sv += e * (k as f64 - i as f64);
        }
        uv[0] = T::narrow(su / z);
        uv[1] = T::narrow(sv / z);
    });
    FlowField::from_vec(ht, wt, out)
}

/// Highest score over source positions for each target cell.
pub fn peak_scores<T: Real>(c: &Corr4D<T>) -> RasterImage<T> {
    let [ht, wt, hs, ws] = c.dims();
    let n = hs * ws * c.channels();
    RasterImage::from_fn(ht, wt, 1, |i, j, _| {
        let at = (i * wt + j) * n;
        c.data()[at..at + n].iter().copied().fold(T::neg_infinity(), T::max)
    })
}

/// Coarsest-level flow: soft-argmax plus a convolutional correction fed
/// with the initial flow and the peak score map.
#[derive(Debug, Clone)]
pub struct Head4 {
    pub temperature: f64,
    refine: ConvStack,
}

impl Head4 {
    pub fn from_store(store: &WeightStore, arch: &ArchConfig) -> Result<Self> {
        Ok(Self {
            temperature: arch.temperature(),
            refine: ConvStack::from_store(store, "head4.refine", &[3, arch.refine_channels, 2])?,
        })
    }

    pub fn forward<T: Real>(&self, c_tilde: &Corr4D<T>) -> Result<FlowField<T>> {
        let init = softargmax_flow(c_tilde, self.temperature)?;
        let input = RasterImage::concat_channels(&[init.as_raster(), &peak_scores(c_tilde)])?;
        let delta = self.refine.forward(&input)?;
        let sum = init.as_raster().zip_map(&delta, |a, b| a + b)?;
        FlowField::from_raster(sum)
    }
}

pub fn head4<T: Real>(c_tilde: &Corr4D<T>, weights: &WeightStore, arch: &ArchConfig) -> Result<FlowField<T>> {
    Head4::from_store(weights, arch)?.forward(c_tilde)
}
