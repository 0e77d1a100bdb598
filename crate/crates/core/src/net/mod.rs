//! Forward pass of the joint registration and change network.
//!
//! Shared-weight feature pyramid, global matching at 1/32 scale (cosine
//! correlation, mutual filtering, symmetric 4D consensus, soft-argmax head),
//! then three coarse-to-fine levels that warp, correlate locally and predict
//! a flow residual and change probabilities.

mod arch;
mod consensus;
mod conv2d;
mod conv4d;
mod correlation;
mod extractor;
mod forward;
mod head4;
mod lmodule;
mod loss;
mod mutual;
mod prob;
mod volume;
mod weights;

pub use arch::{ArchConfig, SIZE_DIVISOR};
pub use consensus::{neighborhood_consensus, ConsensusNet};
pub use conv2d::{relu, Conv2d, ConvStack};
pub use conv4d::{conv4d, Conv4d};
pub use correlation::{global_correlation, local_correlation, LocalCorrVolume, MIN_FEATURE_NORM};
pub use extractor::{check_input_dims, extract_features, FeatureExtractor, FeaturePyramid, ReferenceExtractor};
pub use forward::{e2ecd_forward, ChangeNet, ForwardOutput};
pub use head4::{head4, peak_scores, softargmax_flow, Head4};
pub use lmodule::{l_module_forward, LevelModule, LevelOutput};
pub use loss::{balanced_ce_level, class_balanced_ce, flow_epe, pool_mask};
pub use mutual::mutual_matching;
pub use prob::ChangeProbMap;
pub use volume::Corr4D;
pub use weights::{init_weights, Tensor, WeightStore, WEIGHTS_MAGIC, WEIGHTS_VERSION};
