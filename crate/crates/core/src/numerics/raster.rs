use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major `height × width × channels` array of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage<T> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Real> RasterImage<T> {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self::filled(height, width, channels, T::zero())
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: T) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::InvalidShape(format!(
                "raster {height}x{width}x{channels} needs {} values, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds a raster by evaluating `f(y, x, c)` at every element.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self {
            height,
            width,
            channels,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }
    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }
    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }
    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> T {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: T) {
        let i = (y * self.width + x) * self.channels + c;
        self.data[i] = v;
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[T] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, y: usize, x: usize) -> &mut [T] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two same-shaped rasters.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::InvalidShape(format!(
                "raster dims {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(Self {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Extracts one channel as a single-channel raster.
    pub fn channel(&self, c: usize) -> Self {
        Self::from_fn(self.height, self.width, 1, |y, x, _| self.get(y, x, c))
    }

    /// Concatenates channels of same-sized rasters, in argument order.
    pub fn concat_channels(parts: &[&Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("concat of zero rasters".into()))?;
        let (h, w) = (first.height, first.width);
        if let Some(bad) = parts.iter().find(|p| p.height != h || p.width != w) {
            return Err(Error::InvalidShape(format!(
                "concat {h}x{w} with {}x{}",
                bad.height, bad.width
            )));
        }
        let channels: usize = parts.iter().map(|p| p.channels).sum();
        let mut data = Vec::with_capacity(h * w * channels);
        for y in 0..h {
            for x in 0..w {
                for p in parts {
                    data.extend_from_slice(p.pixel(y, x));
                }
            }
        }
        Ok(Self {
            height: h,
            width: w,
            channels,
            data,
        })
    }

    /// Copies the window `[top, top+height) × [left, left+width)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width {
            return Err(Error::InvalidArgument(format!(
                "crop {height}x{width}+{top}+{left} outside {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * self.channels);
        for y in top..top + height {
            let row = (y * self.width + left) * self.channels;
            data.extend_from_slice(&self.data[row..row + width * self.channels]);
        }
        Ok(Self {
            height,
            width,
            channels: self.channels,
            data,
        })
    }

    pub fn cast<U: Real>(&self) -> RasterImage<U> {
        RasterImage {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|&v| U::narrow(v.widen())).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a.widen() - b.widen()).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-pixel {0,1} map: validity masks and change labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    values: Vec<u8>,
}

impl BinaryMask {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![0; height * width],
        }
    }

    pub fn ones(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![1; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::InvalidShape(format!(
                "mask {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::InvalidArgument(format!(
                "mask value {} at index {pos} is not 0 or 1",
                values[pos]
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut values = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                values.push(f(y, x) as u8);
            }
        }
        Self {
            height,
            width,
            values,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
    #[inline]
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.values[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, on: bool) {
        self.values[y * self.width + x] = on as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width {
            return Err(Error::InvalidArgument(format!(
                "crop {height}x{width}+{top}+{left} outside {}x{}",
                self.height, self.width
            )));
        }
        Ok(Self::from_fn(height, width, |y, x| self.get(top + y, left + x)))
    }

    /// Thresholds one channel of a raster: `1` where `value >= threshold`.
    pub fn from_threshold<T: Real>(raster: &RasterImage<T>, channel: usize, threshold: f64) -> Self {
        Self::from_fn(raster.height(), raster.width(), |y, x| {
            raster.get(y, x, channel).widen() >= threshold
        })
    }
}
