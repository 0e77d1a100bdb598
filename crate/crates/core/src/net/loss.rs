use crate::error::{Error, Result};
use crate::net::ChangeProbMap;
use crate::numerics::{BinaryMask, FlowField};
use crate::scalar::Real;

const LOG_FLOOR: f64 = 1e-7;

/// Shrinks a mask by an integer factor; each output cell is the max (or min)
/// of its `factor × factor` block.
pub fn pool_mask(mask: &BinaryMask, factor: usize, use_max: bool) -> Result<BinaryMask> {
    let (h, w) = mask.dims();
    if factor == 0 || h % factor != 0 || w % factor != 0 {
        return Err(Error::InvalidShape(format!("cannot pool {h}x{w} by {factor}")));
    }
    Ok(BinaryMask::from_fn(h / factor, w / factor, |y, x| {
        let mut block = (0..factor).flat_map(|dy| (0..factor).map(move |dx| (y * factor + dy, x * factor + dx)));
        if use_max {
            block.any(|(yy, xx)| mask.get(yy, xx))
        } else {
            block.all(|(yy, xx)| mask.get(yy, xx))
        }
    }))
}

/// Class-balanced cross entropy of one prediction against same-size labels.
/// Returns `None` when no pixel is valid.
pub fn balanced_ce_level<T: Real>(probs: &ChangeProbMap<T>, gt: &BinaryMask, valid: &BinaryMask) -> Result<Option<f64>> {
    if probs.dims() != gt.dims() || gt.dims() != valid.dims() {
        return Err(Error::InvalidShape(format!(
            "loss: prediction {:?}, labels {:?}, mask {:?}",
            probs.dims(),
            gt.dims(),
            valid.dims()
        )));
    }
    let (h, w) = gt.dims();
    let (mut pos, mut neg) = (0usize, 0usize);
    for y in 0..h {
        for x in 0..w {
            if valid.get(y, x) {
                if gt.get(y, x) {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
        }
    }
    let n = pos + neg;
    if n == 0 {
        return Ok(None);
    }
    let beta = neg as f64 / n as f64;
    let mut sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            if !valid.get(y, x) {
                continue;
            }
            sum += if gt.get(y, x) {
                beta * probs.changed(y, x).widen().max(LOG_FLOOR).ln()
            } else {
                (1.0 - beta) * probs.unchanged(y, x).widen().max(LOG_FLOOR).ln()
            };
        }
    }
    Ok(Some(-sum / n as f64))
}

/// Multi-scale class-balanced cross entropy.
///
/// Labels and validity are given at full resolution and pooled to each
/// prediction's size (labels by max, validity by min). The result is the
/// mean over levels that have at least one valid pixel, or 0 if none do.
pub fn class_balanced_ce<T: Real>(levels: &[ChangeProbMap<T>], gt: &BinaryMask, valid: &BinaryMask) -> Result<f64> {
    if gt.dims() != valid.dims() {
        return Err(Error::InvalidShape(format!("labels {:?} vs mask {:?}", gt.dims(), valid.dims())));
    }
    let (h, w) = gt.dims();
    let mut total = 0.0;
    let mut counted = 0usize;
    for probs in levels {
        let (ph, pw) = probs.dims();
        if ph == 0 || pw == 0 || h % ph != 0 || w % pw != 0 || h / ph != w / pw {
            return Err(Error::InvalidShape(format!("prediction {ph}x{pw} does not tile labels {h}x{w}")));
        }
        let f = h / ph;
        let level_loss = balanced_ce_level(probs, &pool_mask(gt, f, true)?, &pool_mask(valid, f, false)?)?;
        if let Some(l) = level_loss {
            total += l;
            counted += 1;
        }
    }
    Ok(if counted == 0 { 0.0 } else { total / counted as f64 })
}

/// Mean endpoint error over valid pixels.
pub fn flow_epe<T: Real>(flow: &FlowField<T>, gt: &FlowField<T>, valid: &BinaryMask) -> Result<f64> {
    if flow.dims() != gt.dims() || gt.dims() != valid.dims() {
        return Err(Error::InvalidShape(format!(
            "epe: flow {:?}, gt {:?}, mask {:?}",
            flow.dims(),
            gt.dims(),
            valid.dims()
        )));
    }
    let (h, w) = flow.dims();
    let (mut sum, mut n) = (0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            if valid.get(y, x) {
                let (u, v) = flow.get(y, x);
                let (gu, gv) = gt.get(y, x);
                sum += (u.widen() - gu.widen()).hypot(v.widen() - gv.widen());
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::UndefinedMetric("endpoint error over an empty mask".into()));
    }
    Ok(sum / n as f64)
}
