//! Files written by `forward` for each sample.

use std::path::{Path, PathBuf};

use regchange::net::SIZE_DIVISOR;
use serde::{Deserialize, Serialize};

pub const PRED_META_SUFFIX: &str = "pred.json";

/// Where the network input sat inside the original sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredMeta {
    pub id: String,
    pub height: usize,
    pub width: usize,
    pub crop_top: usize,
    pub crop_left: usize,
    pub crop_height: usize,
    pub crop_width: usize,
    pub threshold: f64,
}

pub struct PredPaths {
    pub flow: PathBuf,
    pub probs: PathBuf,
    pub change: PathBuf,
    pub meta: PathBuf,
}

impl PredPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        let p = |suffix: &str| dir.join(format!("{stem}_{suffix}"));
        Self {
            flow: p("flow.flo"),
            probs: p("prob.r32"),
            change: p("change.png"),
            meta: p(PRED_META_SUFFIX),
        }
    }
}

/// Largest centred window whose sides are multiples of the size divisor:
/// `(top, left, height, width)`.
pub fn center_crop(height: usize, width: usize) -> (usize, usize, usize, usize) {
    let ch = height / SIZE_DIVISOR * SIZE_DIVISOR;
    let cw = width / SIZE_DIVISOR * SIZE_DIVISOR;
    ((height - ch) / 2, (width - cw) / 2, ch, cw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_to_multiple() {
        assert_eq!(center_crop(1000, 1000), (4, 4, 992, 992));
        assert_eq!(center_crop(64, 96), (0, 0, 64, 96));
        assert_eq!(center_crop(70, 33), (3, 0, 64, 32));
    }
}
