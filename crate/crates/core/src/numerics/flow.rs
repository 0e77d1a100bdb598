use crate::error::{Error, Result};
use crate::numerics::{upsample_bilinear, RasterImage};
use crate::scalar::Real;

/// Per-pixel `(u, v)` displacement in the pixel units of the field's own
/// resolution. A target pixel `x` reads the source at `x + flow(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T> {
    vectors: RasterImage<T>,
}

impl<T: Real> FlowField<T> {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            vectors: RasterImage::zeros(height, width, 2),
        }
    }

    pub fn constant(height: usize, width: usize, u: T, v: T) -> Self {
        Self::from_fn(height, width, |_, _| (u, v))
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> (T, T)) -> Self {
        let mut data = Vec::with_capacity(height * width * 2);
        for y in 0..height {
            for x in 0..width {
                let (u, v) = f(y, x);
                data.push(u);
                data.push(v);
            }
        }
        Self {
            vectors: RasterImage::from_vec(height, width, 2, data).expect("length by construction"),
        }
    }

    /// Interleaved `(u, v)` pairs, row-major.
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        Ok(Self {
            vectors: RasterImage::from_vec(height, width, 2, data)?,
        })
    }

    pub fn from_raster(raster: RasterImage<T>) -> Result<Self> {
        if raster.channels() != 2 {
            return Err(Error::InvalidShape(format!(
                "flow needs 2 channels, got {}",
                raster.channels()
            )));
        }
        Ok(Self { vectors: raster })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.vectors.height()
    }
    #[inline]
    pub fn width(&self) -> usize {
        self.vectors.width()
    }
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> (T, T) {
        let p = self.vectors.pixel(y, x);
        (p[0], p[1])
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, u: T, v: T) {
        let p = self.vectors.pixel_mut(y, x);
        p[0] = u;
        p[1] = v;
    }

    /// The field as a two-channel raster (`u` then `v`).
    pub fn as_raster(&self) -> &RasterImage<T> {
        &self.vectors
    }

    pub fn into_raster(self) -> RasterImage<T> {
        self.vectors
    }

    pub fn data(&self) -> &[T] {
        self.vectors.data()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            vectors: self.vectors.map(|v| v * s),
        }
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            vectors: self.vectors.crop(top, left, height, width)?,
        })
    }

    pub fn cast<U: Real>(&self) -> FlowField<U> {
        FlowField {
            vectors: self.vectors.cast(),
        }
    }
}

/// Spatially upsamples a flow by `factor` and rescales its displacements by
/// the same factor, keeping them in the pixel units of the new resolution.
pub fn upsample_flow<T: Real>(flow: &FlowField<T>, factor: usize) -> Result<FlowField<T>> {
    let up = upsample_bilinear(flow.as_raster(), factor)?;
    let k = T::lit(factor as f64);
    FlowField::from_raster(up.map(|v| v * k))
}
