use std::ops::{Add, AddAssign};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::BinaryMask;

/// Confusion counts under the radius-`r` relaxation.
///
/// A valid positive is a true positive when any valid predicted pixel lies
/// in the `(2r + 1)²` square around it. Valid negatives inside such a square
/// are set aside in `masked_out`; the remaining negatives are scored per
/// pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct RelaxedConfusion {
    pub radius: usize,
    pub true_pos: u64,
    pub false_neg: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub masked_out: u64,
}

impl RelaxedConfusion {
    pub fn empty(radius: usize) -> Self {
        Self {
            radius,
            ..Default::default()
        }
    }

    /// Pixels that took part in the evaluation.
    pub fn evaluated(&self) -> u64 {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }
}

impl Add for RelaxedConfusion {
    type Output = Self;

    /// Sums counts. Both sides must share a radius.
    fn add(self, o: Self) -> Self {
        assert_eq!(self.radius, o.radius, "cannot merge confusions at different radii");
        Self {
            radius: self.radius,
            true_pos: self.true_pos + o.true_pos,
            false_neg: self.false_neg + o.false_neg,
            false_pos: self.false_pos + o.false_pos,
            true_neg: self.true_neg + o.true_neg,
            masked_out: self.masked_out + o.masked_out,
        }
    }
}

impl AddAssign for RelaxedConfusion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Summed-area table over a 0/1 indicator, `(h + 1) × (w + 1)`.
struct BoxCounter {
    w: usize,
    h: usize,
    table: Vec<u32>,
}

impl BoxCounter {
    fn new(h: usize, w: usize, on: impl Fn(usize, usize) -> bool) -> Self {
        let stride = w + 1;
        let mut table = vec![0u32; (h + 1) * stride];
        for y in 0..h {
            let mut row = 0;
            for x in 0..w {
                row += on(y, x) as u32;
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        Self { w, h, table }
    }

    /// Whether the clipped square of half-width `r` around `(y, x)` holds any set cell.
    fn any_near(&self, y: usize, x: usize, r: usize) -> bool {
        let stride = self.w + 1;
        let (y0, x0) = (y.saturating_sub(r), x.saturating_sub(r));
        let (y1, x1) = ((y + r + 1).min(self.h), (x + r + 1).min(self.w));
        let t = &self.table;
        t[y1 * stride + x1] + t[y0 * stride + x0] > t[y0 * stride + x1] + t[y1 * stride + x0]
    }
}

pub fn relaxed_confusion(pred: &BinaryMask, gt: &BinaryMask, valid: &BinaryMask, radius: usize) -> Result<RelaxedConfusion> {
    if pred.dims() != gt.dims() || gt.dims() != valid.dims() {
        return Err(Error::InvalidArgument(format!(
            "confusion: prediction {:?}, labels {:?}, mask {:?}",
            pred.dims(),
            gt.dims(),
            valid.dims()
        )));
    }
    let (h, w) = gt.dims();
    let preds = BoxCounter::new(h, w, |y, x| pred.get(y, x) && valid.get(y, x));
    let positives = BoxCounter::new(h, w, |y, x| gt.get(y, x) && valid.get(y, x));
    let rows: Vec<RelaxedConfusion> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut c = RelaxedConfusion::empty(radius);
            for x in 0..w {
                if !valid.get(y, x) {
                    continue;
                }
                if gt.get(y, x) {
                    if preds.any_near(y, x, radius) {
                        c.true_pos += 1;
                    } else {
                        c.false_neg += 1;
                    }
                } else if positives.any_near(y, x, radius) {
                    c.masked_out += 1;
                } else if pred.get(y, x) {
                    c.false_pos += 1;
                } else {
                    c.true_neg += 1;
                }
            }
            c
        })
        .collect();
    Ok(rows.into_iter().fold(RelaxedConfusion::empty(radius), Add::add))
}
