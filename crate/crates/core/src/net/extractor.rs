use crate::error::{Error, Result};
use crate::net::{relu, ArchConfig, Conv2d, WeightStore, SIZE_DIVISOR};
use crate::numerics::RasterImage;
use crate::scalar::Real;

/// Feature maps at 1/4, 1/8, 1/16 and 1/32 of the input resolution.
/// `levels[0]` is the finest (level 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid<T> {
    pub levels: [RasterImage<T>; 4],
}

impl<T: Real> FeaturePyramid<T> {
    /// Level `level` in `1..=4`.
    pub fn level(&self, level: usize) -> &RasterImage<T> {
        &self.levels[level - 1]
    }
}

/// Anything that turns an image into a four-level pyramid. Both images of a
/// pair go through the same extractor instance.
pub trait FeatureExtractor<T: Real>: Send + Sync {
    fn extract(&self, image: &RasterImage<T>) -> Result<FeaturePyramid<T>>;

    /// Channel counts of levels 1 to 4.
    fn channels(&self) -> [usize; 4];
}

pub fn check_input_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 || !height.is_multiple_of(SIZE_DIVISOR) || !width.is_multiple_of(SIZE_DIVISOR) {
        return Err(Error::InvalidShape(format!(
            "input {height}x{width} is not a non-empty multiple of {SIZE_DIVISOR}"
        )));
    }
    Ok(())
}

/// A stride-2 stem followed by four stride-2 stages, each a 3×3 convolution
/// and ReLU. The stage outputs form the pyramid.
#[derive(Debug, Clone)]
pub struct ReferenceExtractor {
    input_channels: usize,
    stem: Conv2d,
    stages: [Conv2d; 4],
}

impl ReferenceExtractor {
    pub fn from_store(store: &WeightStore, arch: &ArchConfig) -> Result<Self> {
        let stem = Conv2d::from_store(store, "extractor.stem", arch.input_channels, arch.stem_channels, 2)?;
        let mut prev = arch.stem_channels;
        let mut stages = Vec::with_capacity(4);
        for (i, &c) in arch.channels.iter().enumerate() {
            stages.push(Conv2d::from_store(store, &format!("extractor.stage{}", i + 1), prev, c, 2)?);
            prev = c;
        }
        Ok(Self {
            input_channels: arch.input_channels,
            stem,
            stages: stages.try_into().expect("four stages"),
        })
    }
}

impl<T: Real> FeatureExtractor<T> for ReferenceExtractor {
    fn extract(&self, image: &RasterImage<T>) -> Result<FeaturePyramid<T>> {
        check_input_dims(image.height(), image.width())?;
        if image.channels() != self.input_channels {
            return Err(Error::InvalidShape(format!(
                "extractor expects {} channels, got {}",
                self.input_channels,
                image.channels()
            )));
        }
        let mut x = relu(&self.stem.forward(image)?);
        let mut levels = Vec::with_capacity(4);
        for stage in &self.stages {
            x = relu(&stage.forward(&x)?);
            levels.push(x.clone());
        }
        Ok(FeaturePyramid {
            levels: levels.try_into().expect("four levels"),
        })
    }

    fn channels(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|i| self.stages[i].out_channels)
    }
}

pub fn extract_features<T: Real>(image: &RasterImage<T>, weights: &WeightStore, arch: &ArchConfig) -> Result<FeaturePyramid<T>> {
    ReferenceExtractor::from_store(weights, arch)?.extract(image)
}
