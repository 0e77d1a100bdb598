use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::Corr4D;
use crate::numerics::RasterImage;
use crate::scalar::Real;

/// Feature vectors with a norm below this correlate to zero.
pub const MIN_FEATURE_NORM: f64 = 1e-12;

/// Cosine similarity between every target position `(i, j)` and every
/// source position `(k, l)`.
pub fn global_correlation<T: Real>(target: &RasterImage<T>, source: &RasterImage<T>) -> Result<Corr4D<T>> {
    if target.channels() != source.channels() {
        return Err(Error::InvalidShape(format!(
            "global correlation: {} target channels vs {} source channels",
            target.channels(),
            source.channels()
        )));
    }
    let c = target.channels();
    let unit = |img: &RasterImage<T>| -> Vec<f64> {
        let mut v: Vec<f64> = img.data().iter().map(|x| x.widen()).collect();
        for px in v.chunks_exact_mut(c.max(1)) {
            let norm = px.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < MIN_FEATURE_NORM {
                px.iter_mut().for_each(|x| *x = 0.0);
            } else {
                px.iter_mut().for_each(|x| *x /= norm);
            }
        }
        v
    };
    let (ht, wt) = (target.height(), target.width());
    let (hs, ws) = (source.height(), source.width());
    let tn = unit(target);
    let sn = unit(source);
    let mut out = Corr4D::zeros([ht, wt, hs, ws], 1);
    if out.data().is_empty() || c == 0 {
        return Ok(out);
    }
    out.data_mut()
        .par_chunks_mut(hs * ws)
        .enumerate()
        .for_each(|(t, slab)| {
            let a = &tn[t * c..(t + 1) * c];
            for (s, o) in slab.iter_mut().enumerate() {
                let b = &sn[s * c..(s + 1) * c];
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                *o = T::narrow(dot);
            }
        });
    Ok(out)
}

/// Dot products between each target feature and the source features in a
/// `(2r + 1)²` window. Channel `(dy + r)(2r + 1) + (dx + r)` holds the
/// score for displacement `(dx, dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCorrVolume<T> {
    pub radius: usize,
    pub scores: RasterImage<T>,
}

impl<T: Real> LocalCorrVolume<T> {
    #[inline]
    pub fn channel_of(radius: usize, dx: isize, dy: isize) -> usize {
        let side = 2 * radius + 1;
        (dy + radius as isize) as usize * side + (dx + radius as isize) as usize
    }

    pub fn get(&self, y: usize, x: usize, dx: isize, dy: isize) -> T {
        self.scores.get(y, x, Self::channel_of(self.radius, dx, dy))
    }
}

pub fn local_correlation<T: Real>(
    target: &RasterImage<T>,
    warped_source: &RasterImage<T>,
    radius: usize,
) -> Result<LocalCorrVolume<T>> {
    if target.dims() != warped_source.dims() {
        return Err(Error::InvalidShape(format!(
            "local correlation: target {:?} vs source {:?}",
            target.dims(),
            warped_source.dims()
        )));
    }
    if radius == 0 {
        return Err(Error::InvalidArgument("local correlation radius must be >= 1".into()));
    }
    let (h, w, c) = target.dims();
    let side = 2 * radius + 1;
    let n = side * side;
    let r = radius as isize;
    let tw: Vec<f64> = target.data().iter().map(|v| v.widen()).collect();
    let sw: Vec<f64> = warped_source.data().iter().map(|v| v.widen()).collect();
    let mut scores = RasterImage::zeros(h, w, n);
    if scores.is_empty() {
        return Ok(LocalCorrVolume { radius, scores });
    }
    scores
        .data_mut()
        .par_chunks_mut(w * n)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..w {
                let a = &tw[(y * w + x) * c..(y * w + x + 1) * c];
                let cell = &mut row[x * n..(x + 1) * n];
                for dy in -r..=r {
                    let sy = y as isize + dy;
                    for dx in -r..=r {
                        let sx = x as isize + dx;
                        let ch = ((dy + r) as usize) * side + (dx + r) as usize;
                        if sy < 0 || sx < 0 || sy >= h as isize || sx >= w as isize {
                            cell[ch] = T::zero();
                            continue;
                        }
                        let p = (sy as usize * w + sx as usize) * c;
                        let dot: f64 = a.iter().zip(&sw[p..p + c]).map(|(u, v)| u * v).sum();
                        cell[ch] = T::narrow(dot);
                    }
                }
            }
        });
    Ok(LocalCorrVolume { radius, scores })
}
