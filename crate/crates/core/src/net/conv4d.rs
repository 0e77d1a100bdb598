use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::{Corr4D, WeightStore};
use crate::scalar::Real;

const TAPS: usize = 81;

/// Bias-free 3⁴ convolution over a 4D volume, zero padding 1, stride 1.
#[derive(Debug, Clone)]
pub struct Conv4d {
    pub in_channels: usize,
    pub out_channels: usize,
    /// `[tap][out][in]`, tap = row-major index of the 3⁴ offset.
    taps: Vec<f64>,
}

impl Conv4d {
    /// `weight` is `[out][in][3][3][3][3]` row-major.
    pub fn new(in_channels: usize, out_channels: usize, weight: &[f32]) -> Result<Self> {
        if weight.len() != out_channels * in_channels * TAPS {
            return Err(Error::InvalidShape(format!(
                "conv4d {in_channels}->{out_channels}: {} weights",
                weight.len()
            )));
        }
        let mut taps = vec![0.0; weight.len()];
        for o in 0..out_channels {
            for i in 0..in_channels {
                for t in 0..TAPS {
                    taps[(t * out_channels + o) * in_channels + i] = weight[(o * in_channels + i) * TAPS + t] as f64;
                }
            }
        }
        Ok(Self {
            in_channels,
            out_channels,
            taps,
        })
    }

    pub fn from_store(store: &WeightStore, name: &str, in_channels: usize, out_channels: usize) -> Result<Self> {
        let w = store.get_shaped(name, &[out_channels, in_channels, 3, 3, 3, 3])?;
        Self::new(in_channels, out_channels, &w.data)
    }

    pub fn forward<T: Real>(&self, input: &Corr4D<T>) -> Result<Corr4D<T>> {
        if input.channels() != self.in_channels {
            return Err(Error::InvalidShape(format!(
                "conv4d expects {} channels, got {}",
                self.in_channels,
                input.channels()
            )));
        }
        let dims = input.dims();
        let [d0, d1, d2, d3] = dims.map(|d| d as isize);
        let (cin, cout) = (self.in_channels, self.out_channels);
        let wide: Vec<f64> = input.data().iter().map(|v| v.widen()).collect();
        let mut out = Corr4D::zeros(dims, cout);
        if out.data().is_empty() {
            return Ok(out);
        }
        out.data_mut()
            .par_chunks_mut(cout)
            .enumerate()
            .for_each(|(pos, cell)| {
                let l = (pos % dims[3]) as isize;
                let k = ((pos / dims[3]) % dims[2]) as isize;
                let j = ((pos / (dims[3] * dims[2])) % dims[1]) as isize;
                let i = (pos / (dims[3] * dims[2] * dims[1])) as isize;
                let mut acc = vec![0.0f64; cout];
                let mut tap = 0;
                for a in -1..=1isize {
                    let ii = i + a;
                    for b in -1..=1isize {
                        let jj = j + b;
                        for c in -1..=1isize {
                            let kk = k + c;
                            for d in -1..=1isize {
                                let ll = l + d;
                                let t = tap;
                                tap += 1;
                                if ii < 0 || jj < 0 || kk < 0 || ll < 0 || ii >= d0 || jj >= d1 || kk >= d2 || ll >= d3 {
                                    continue;
                                }
                                let p = ((((ii * d1 + jj) * d2 + kk) * d3 + ll) as usize) * cin;
                                let px = &wide[p..p + cin];
                                let w = &self.taps[t * cout * cin..(t + 1) * cout * cin];
                                for (acc_o, wrow) in acc.iter_mut().zip(w.chunks_exact(cin)) {
                                    let mut s = 0.0;
                                    for (wv, xv) in wrow.iter().zip(px) {
                                        s += wv * xv;
                                    }
                                    *acc_o += s;
                                }
                            }
                        }
                    }
                }
                for (o, a) in cell.iter_mut().zip(&acc) {
                    *o = T::narrow(*a);
                }
            });
        Ok(out)
    }
}

/// One-shot form: `kernel` is `[out][in][3][3][3][3]`.
pub fn conv4d<T: Real>(input: &Corr4D<T>, kernel: &[f32], out_channels: usize) -> Result<Corr4D<T>> {
    Conv4d::new(input.channels(), out_channels, kernel)?.forward(input)
}
