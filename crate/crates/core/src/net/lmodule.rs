use crate::error::{Error, Result};
use crate::net::{local_correlation, ArchConfig, ChangeProbMap, ConvStack, WeightStore};
use crate::numerics::{upsample_flow, warp_by_flow, FlowField, RasterImage};
use crate::scalar::Real;

/// Output of one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutput<T> {
    pub flow: FlowField<T>,
    pub change: ChangeProbMap<T>,
}

/// Flow and change heads of one pyramid level (1, 2 or 3).
#[derive(Debug, Clone)]
pub struct LevelModule {
    pub level: usize,
    radius: usize,
    flow_head: ConvStack,
    cd_head: ConvStack,
}

impl LevelModule {
    pub fn from_store(store: &WeightStore, arch: &ArchConfig, level: usize) -> Result<Self> {
        if !(1..=3).contains(&level) {
            return Err(Error::InvalidArgument(format!("refinement level must be 1, 2 or 3, got {level}")));
        }
        let [f0, f1] = arch.flow_head_channels;
        let [c0, c1] = arch.cd_head_channels;
        let flow_head = ConvStack::from_store(
            store,
            &format!("level{level}.flow_head"),
            &[arch.local_corr_channels() + 2, f0, f1, 2],
        )?;
        let cd_head = ConvStack::from_store(store, &format!("level{level}.cd_head"), &[arch.level_channels(level), c0, c1, 2])?;
        Ok(Self {
            level,
            radius: arch.radius,
            flow_head,
            cd_head,
        })
    }

    /// Upsamples the coarser flow, warps the source features with it, and
    /// predicts a flow correction and change probabilities.
    pub fn forward<T: Real>(
        &self,
        source: &RasterImage<T>,
        target: &RasterImage<T>,
        coarser_flow: &FlowField<T>,
    ) -> Result<LevelOutput<T>> {
        let w_up = upsample_flow(coarser_flow, 2)?;
        if w_up.dims() != (target.height(), target.width()) || source.dims() != target.dims() {
            return Err(Error::InvalidShape(format!(
                "level {}: source {:?}, target {:?}, upsampled flow {:?}",
                self.level,
                source.dims(),
                target.dims(),
                w_up.dims()
            )));
        }
        let warped = warp_by_flow(source, &w_up)?;
        let corr = local_correlation(target, &warped, self.radius)?;
        let head_in = RasterImage::concat_channels(&[&corr.scores, w_up.as_raster()])?;
        let delta = self.flow_head.forward(&head_in)?;
        let flow = FlowField::from_raster(w_up.as_raster().zip_map(&delta, |a, b| a + b)?)?;
        let diff = warped.zip_map(target, |a, b| (a - b).abs())?;
        let change = ChangeProbMap::from_logits(&self.cd_head.forward(&diff)?)?;
        Ok(LevelOutput { flow, change })
    }
}

pub fn l_module_forward<T: Real>(
    source: &RasterImage<T>,
    target: &RasterImage<T>,
    coarser_flow: &FlowField<T>,
    weights: &WeightStore,
    arch: &ArchConfig,
    level: usize,
) -> Result<LevelOutput<T>> {
    LevelModule::from_store(weights, arch, level)?.forward(source, target, coarser_flow)
}
