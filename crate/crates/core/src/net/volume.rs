use crate::error::{Error, Result};
use crate::scalar::Real;

/// 4D correlation volume over (target row, target col, source row, source
/// col), optionally with a trailing channel axis. Layout is row-major
/// `(i, j, k, l, c)`; with one channel this is plain `(i, j, k, l)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corr4D<T> {
    dims: [usize; 4],
    channels: usize,
    data: Vec<T>,
}

impl<T: Real> Corr4D<T> {
    pub fn zeros(dims: [usize; 4], channels: usize) -> Self {
        Self {
            dims,
            channels,
            data: vec![T::zero(); dims.iter().product::<usize>() * channels],
        }
    }

    pub fn from_vec(dims: [usize; 4], channels: usize, data: Vec<T>) -> Result<Self> {
        let n = dims.iter().product::<usize>() * channels;
        if data.len() != n {
            return Err(Error::InvalidShape(format!(
                "volume {dims:?}x{channels} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, channels, data })
    }

    /// Single-channel volume from `f(i, j, k, l)`.
    pub fn from_fn(dims: [usize; 4], mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    for l in 0..dims[3] {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Self { dims, channels: 1, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }
    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }
    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }
    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let [_, wt, hs, ws] = self.dims;
        (((i * wt + j) * hs + k) * ws + l) * self.channels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.data[self.offset(i, j, k, l)]
    }

    #[inline]
    pub fn get_c(&self, i: usize, j: usize, k: usize, l: usize, c: usize) -> T {
        self.data[self.offset(i, j, k, l) + c]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: T) {
        let o = self.offset(i, j, k, l);
        self.data[o] = v;
    }

    /// Swaps the target and source axes: `out[k, l, i, j] = self[i, j, k, l]`.
    pub fn transpose(&self) -> Self {
        let [ht, wt, hs, ws] = self.dims;
        let mut out = Self::zeros([hs, ws, ht, wt], self.channels);
        let c = self.channels;
        for i in 0..ht {
            for j in 0..wt {
                for k in 0..hs {
                    for l in 0..ws {
                        let src = self.offset(i, j, k, l);
                        let dst = out.offset(k, l, i, j);
                        out.data[dst..dst + c].copy_from_slice(&self.data[src..src + c]);
                    }
                }
            }
        }
        out
    }

    pub fn relu(&self) -> Self {
        Self {
            dims: self.dims,
            channels: self.channels,
            data: self.data.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims || self.channels != other.channels {
            return Err(Error::InvalidShape(format!(
                "volume add {:?}x{} vs {:?}x{}",
                self.dims, self.channels, other.dims, other.channels
            )));
        }
        Ok(Self {
            dims: self.dims,
            channels: self.channels,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.widen() - b.widen()).abs())
            .fold(0.0, f64::max)
    }
}
