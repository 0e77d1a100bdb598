use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::AffineTransform2D;

/// Ranges for the random viewpoint perturbation applied to pre-event images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSamplingConfig {
    /// Rotation drawn from `[-max_rotation, max_rotation]` degrees.
    pub max_rotation: f64,
    /// Isotropic scale drawn from `[scale_range.0, scale_range.1]`.
    pub scale_range: (f64, f64),
    /// Each translation component drawn from `±max_translation_frac · min(H, W)`.
    pub max_translation_frac: f64,
    /// Shear angle drawn from `[-max_shear, max_shear]` degrees.
    pub max_shear: f64,
    pub seed: u64,
}

impl Default for AffineSamplingConfig {
    fn default() -> Self {
        Self {
            max_rotation: 25.0,
            scale_range: (0.8, 1.25),
            max_translation_frac: 0.1,
            max_shear: 10.0,
            seed: 0,
        }
    }
}

impl AffineSamplingConfig {
    /// Ranges that collapse to the identity transform.
    pub fn identity(seed: u64) -> Self {
        Self {
            max_rotation: 0.0,
            scale_range: (1.0, 1.0),
            max_translation_frac: 0.0,
            max_shear: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.max_rotation,
            self.scale_range.0,
            self.scale_range.1,
            self.max_translation_frac,
            self.max_shear,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("affine ranges must be finite".into()));
        }
        if self.scale_range.0 <= 0.0 || self.scale_range.0 > self.scale_range.1 {
            return Err(Error::Config(format!(
                "scale_range must satisfy 0 < min <= max, got {:?}",
                self.scale_range
            )));
        }
        if self.max_rotation < 0.0 || self.max_translation_frac < 0.0 || self.max_shear < 0.0 {
            return Err(Error::Config("rotation/translation/shear bounds must be >= 0".into()));
        }
        if self.max_shear >= 90.0 {
            return Err(Error::Config("max_shear must be below 90 degrees".into()));
        }
        Ok(())
    }
}

/// One draw of the perturbation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub rotation_deg: f64,
    pub scale: f64,
    pub shear_deg: f64,
    pub tx: f64,
    pub ty: f64,
}

impl AffineParams {
    /// Rotation · shear · scale about the image centre, then translation.
    pub fn to_transform(&self, height: usize, width: usize) -> AffineTransform2D<f64> {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let k = self.shear_deg.to_radians().tan();
        let z = self.scale;
        // [[c, -s], [s, c]] · [[1, k], [0, 1]] · z
        let linear = [[c * z, (c * k - s) * z], [s * z, (s * k + c) * z]];
        let center = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
        AffineTransform2D::about_center(linear, center, (self.tx, self.ty))
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Draws the parameters for sample `index`; a pure function of
/// `(config.seed, index, height, width)`.
pub fn sample_affine_params(
    config: &AffineSamplingConfig,
    index: u64,
    height: usize,
    width: usize,
) -> Result<AffineParams> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let t_max = config.max_translation_frac * height.min(width) as f64;
    loop {
        let params = AffineParams {
            rotation_deg: uniform(&mut rng, -config.max_rotation, config.max_rotation),
            scale: uniform(&mut rng, config.scale_range.0, config.scale_range.1),
            shear_deg: uniform(&mut rng, -config.max_shear, config.max_shear),
            tx: uniform(&mut rng, -t_max, t_max),
            ty: uniform(&mut rng, -t_max, t_max),
        };
        if params.to_transform(height, width).is_invertible() {
            return Ok(params);
        }
    }
}

/// Samples the transform mapping unregistered-source coordinates to
/// registered pre-event coordinates.
pub fn sample_affine(
    config: &AffineSamplingConfig,
    index: u64,
    height: usize,
    width: usize,
) -> Result<AffineTransform2D<f64>> {
    Ok(sample_affine_params(config, index, height, width)?.to_transform(height, width))
}
