use crate::error::Result;
use crate::net::{ArchConfig, Conv4d, Corr4D, WeightStore};
use crate::scalar::Real;

/// The 4D filter stack `1 → k → k → 1` with ReLU between layers.
#[derive(Debug, Clone)]
pub struct ConsensusNet {
    layers: Vec<Conv4d>,
}

impl ConsensusNet {
    pub fn from_store(store: &WeightStore, arch: &ArchConfig) -> Result<Self> {
        let k = arch.consensus_channels;
        let layers = [(1, k), (k, k), (k, 1)]
            .iter()
            .enumerate()
            .map(|(i, &(inp, out))| Conv4d::from_store(store, &format!("consensus.{i}.weight"), inp, out))
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Conv4d>) -> Self {
        Self { layers }
    }

    /// Applies the stack once, without symmetrization.
    pub fn apply<T: Real>(&self, input: &Corr4D<T>) -> Result<Corr4D<T>> {
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(&x)?;
            if i + 1 < self.layers.len() {
                x = x.relu();
            }
        }
        Ok(x)
    }

    /// `N(c) + N(cᵀ)ᵀ`, which commutes with swapping the two images.
    pub fn forward<T: Real>(&self, c_hat: &Corr4D<T>) -> Result<Corr4D<T>> {
        let direct = self.apply(c_hat)?;
        let swapped = self.apply(&c_hat.transpose())?.transpose();
        direct.add(&swapped)
    }
}

pub fn neighborhood_consensus<T: Real>(c_hat: &Corr4D<T>, weights: &WeightStore, arch: &ArchConfig) -> Result<Corr4D<T>> {
    ConsensusNet::from_store(weights, arch)?.forward(c_hat)
}
