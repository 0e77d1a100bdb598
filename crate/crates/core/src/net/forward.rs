use crate::error::{Error, Result};
use crate::net::{
    global_correlation, mutual_matching, ArchConfig, ChangeProbMap, ConsensusNet, FeatureExtractor, Head4,
    LevelModule, ReferenceExtractor, WeightStore,
};
use crate::numerics::{upsample_flow, FlowField, RasterImage};
use crate::scalar::Real;

/// Every output of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput<T> {
    /// Flow at levels 1 to 4 (`level_flows[0]` is 1/4 resolution).
    pub level_flows: [FlowField<T>; 4],
    /// Change probabilities at levels 1 to 3.
    pub level_changes: [ChangeProbMap<T>; 3],
    /// Full-resolution flow.
    pub flow: FlowField<T>,
    /// Full-resolution change probabilities.
    pub change: ChangeProbMap<T>,
}

/// The joint registration and change detection network.
pub struct ChangeNet<E> {
    pub arch: ArchConfig,
    extractor: E,
    consensus: ConsensusNet,
    head4: Head4,
    levels: [LevelModule; 3],
}

impl ChangeNet<ReferenceExtractor> {
    pub fn from_store(weights: &WeightStore, arch: &ArchConfig) -> Result<Self> {
        Self::with_extractor(ReferenceExtractor::from_store(weights, arch)?, weights, arch)
    }
}

impl<E> ChangeNet<E> {
    pub fn with_extractor(extractor: E, weights: &WeightStore, arch: &ArchConfig) -> Result<Self> {
        arch.validate()?;
        Ok(Self {
            arch: arch.clone(),
            extractor,
            consensus: ConsensusNet::from_store(weights, arch)?,
            head4: Head4::from_store(weights, arch)?,
            levels: [
                LevelModule::from_store(weights, arch, 1)?,
                LevelModule::from_store(weights, arch, 2)?,
                LevelModule::from_store(weights, arch, 3)?,
            ],
        })
    }

    pub fn forward<T: Real>(&self, source: &RasterImage<T>, target: &RasterImage<T>) -> Result<ForwardOutput<T>>
    where
        E: FeatureExtractor<T>,
    {
        if source.dims() != target.dims() {
            return Err(Error::InvalidShape(format!(
                "source {:?} and target {:?} differ",
                source.dims(),
                target.dims()
            )));
        }
        let fs = self.extractor.extract(source)?;
        let ft = self.extractor.extract(target)?;

        let corr = global_correlation(ft.level(4), fs.level(4))?;
        let c_tilde = self.consensus.forward(&mutual_matching(&corr))?;
        let w4 = self.head4.forward(&c_tilde)?;

        let l3 = self.levels[2].forward(fs.level(3), ft.level(3), &w4)?;
        let l2 = self.levels[1].forward(fs.level(2), ft.level(2), &l3.flow)?;
        let l1 = self.levels[0].forward(fs.level(1), ft.level(1), &l2.flow)?;

        let flow = upsample_flow(&l1.flow, 4)?;
        let change = l1.change.upsample(4)?;
        Ok(ForwardOutput {
            level_flows: [l1.flow, l2.flow, l3.flow, w4],
            level_changes: [l1.change, l2.change, l3.change],
            flow,
            change,
        })
    }
}

pub fn e2ecd_forward<T: Real>(
    source: &RasterImage<T>,
    target: &RasterImage<T>,
    weights: &WeightStore,
    arch: &ArchConfig,
) -> Result<ForwardOutput<T>> {
    ChangeNet::from_store(weights, arch)?.forward(source, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_weights;

    #[test]
    fn output_shapes() {
        let arch = ArchConfig::default();
        let w = init_weights(1, &arch);
        let a = RasterImage::<f32>::from_fn(64, 64, 3, |y, x, c| ((y + 2 * x + c) % 9) as f32 / 9.0);
        let b = RasterImage::<f32>::from_fn(64, 64, 3, |y, x, c| ((2 * y + x + c) % 7) as f32 / 7.0);
        let out = e2ecd_forward(&a, &b, &w, &arch).unwrap();
        let dims: Vec<_> = out.level_flows.iter().map(|f| f.dims()).collect();
        assert_eq!(dims, vec![(16, 16), (8, 8), (4, 4), (2, 2)]);
        assert_eq!(out.flow.dims(), (64, 64));
        assert_eq!(out.change.dims(), (64, 64));
        assert!(out.change.max_sum_error() < 1e-5);
        for l in 0..3 {
            assert_eq!(out.level_flows[l], upsample_flow(&out.level_flows[l + 1], 2).unwrap());
        }
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let arch = ArchConfig::default();
        let w = init_weights(1, &arch);
        let a = RasterImage::<f32>::zeros(64, 64, 3);
        let b = RasterImage::<f32>::zeros(64, 32, 3);
        assert!(e2ecd_forward(&a, &b, &w, &arch).is_err());
    }
}
