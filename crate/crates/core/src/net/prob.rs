use crate::error::{Error, Result};
use crate::numerics::{upsample_bilinear, BinaryMask, RasterImage};
use crate::scalar::Real;

/// Two-channel per-pixel probabilities `(p_unchanged, p_changed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeProbMap<T> {
    probs: RasterImage<T>,
}

impl<T: Real> ChangeProbMap<T> {
    /// Wraps a two-channel raster after checking the probability simplex.
    pub fn new(probs: RasterImage<T>) -> Result<Self> {
        if probs.channels() != 2 {
            return Err(Error::InvalidShape(format!(
                "probability map needs 2 channels, got {}",
                probs.channels()
            )));
        }
        for px in probs.data().chunks_exact(2) {
            let (a, b) = (px[0].widen(), px[1].widen());
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || (a + b - 1.0).abs() > 1e-5 {
                return Err(Error::InvalidArgument(format!("({a}, {b}) is not a probability pair")));
            }
        }
        Ok(Self { probs })
    }

    /// Per-pixel softmax over two logit channels.
    pub fn from_logits(logits: &RasterImage<T>) -> Result<Self> {
        if logits.channels() != 2 {
            return Err(Error::InvalidShape(format!(
                "softmax needs 2 logit channels, got {}",
                logits.channels()
            )));
        }
        let mut probs = logits.clone();
        for px in probs.data_mut().chunks_exact_mut(2) {
            let (a, b) = (px[0].widen(), px[1].widen());
            let m = a.max(b);
            let (ea, eb) = ((a - m).exp(), (b - m).exp());
            let s = ea + eb;
            px[0] = T::narrow(ea / s);
            px[1] = T::narrow(eb / s);
        }
        Ok(Self { probs })
    }

    /// One-hot probabilities from a label mask.
    pub fn from_labels(labels: &BinaryMask) -> Self {
        let probs = RasterImage::from_fn(labels.height(), labels.width(), 2, |y, x, c| {
            if labels.get(y, x) == (c == 1) {
                T::one()
            } else {
                T::zero()
            }
        });
        Self { probs }
    }

    pub fn height(&self) -> usize {
        self.probs.height()
    }
    pub fn width(&self) -> usize {
        self.probs.width()
    }
    pub fn dims(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    #[inline]
    pub fn unchanged(&self, y: usize, x: usize) -> T {
        self.probs.get(y, x, 0)
    }

    #[inline]
    pub fn changed(&self, y: usize, x: usize) -> T {
        self.probs.get(y, x, 1)
    }

    pub fn as_raster(&self) -> &RasterImage<T> {
        &self.probs
    }

    /// `1` where `p_changed >= threshold`.
    pub fn binarize(&self, threshold: f64) -> BinaryMask {
        BinaryMask::from_threshold(&self.probs, 1, threshold)
    }

    /// Bilinear upsampling followed by per-pixel renormalization.
    pub fn upsample(&self, factor: usize) -> Result<Self> {
        let mut up = upsample_bilinear(&self.probs, factor)?;
        for px in up.data_mut().chunks_exact_mut(2) {
            let (a, b) = (px[0].widen().max(0.0), px[1].widen().max(0.0));
            let s = a + b;
            if s > 0.0 {
                px[0] = T::narrow(a / s);
                px[1] = T::narrow(b / s);
            } else {
                px[0] = T::lit(0.5);
                px[1] = T::lit(0.5);
            }
        }
        Ok(Self { probs: up })
    }

    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            probs: self.probs.crop(top, left, height, width)?,
        })
    }

    /// Largest `|p_unchanged + p_changed − 1|` over the map.
    pub fn max_sum_error(&self) -> f64 {
        self.probs
            .data()
            .chunks_exact(2)
            .map(|p| (p[0].widen() + p[1].widen() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
