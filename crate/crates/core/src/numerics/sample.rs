use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{FlowField, RasterImage};
use crate::scalar::Real;

/// Bilinear interpolation at the real position `(x, y)` (x = column).
///
/// Corners falling outside the image read as zero. The interpolation is
/// written in lerp form, so constant neighbourhoods and integer in-bounds
/// positions reproduce the stored values exactly.
pub fn bilinear_sample<T: Real>(image: &RasterImage<T>, x: T, y: T) -> Vec<T> {
    let mut out = vec![T::zero(); image.channels()];
    bilinear_sample_into(image, x, y, &mut out);
    out
}

pub fn bilinear_sample_into<T: Real>(image: &RasterImage<T>, x: T, y: T, out: &mut [T]) {
    out.iter_mut().for_each(|v| *v = T::zero());
    if !(x.is_finite() && y.is_finite()) {
        return;
    }
    let (h, w) = (image.height() as i64, image.width() as i64);
    let xf = x.floor();
    let yf = y.floor();
    // Anything further than one pixel outside cannot touch the image.
    if xf < T::lit(-1.0) || yf < T::lit(-1.0) || xf > T::lit(w as f64) || yf > T::lit(h as f64) {
        return;
    }
    let x0 = xf.to_i64().unwrap_or(i64::MIN);
    let y0 = yf.to_i64().unwrap_or(i64::MIN);
    let fx = x - xf;
    let fy = y - yf;
    let inside = |yy: i64, xx: i64| yy >= 0 && yy < h && xx >= 0 && xx < w;
    for (c, o) in out.iter_mut().enumerate() {
        let at = |yy: i64, xx: i64| {
            if inside(yy, xx) {
                image.get(yy as usize, xx as usize, c)
            } else {
                T::zero()
            }
        };
        let p00 = at(y0, x0);
        let p01 = at(y0, x0 + 1);
        let p10 = at(y0 + 1, x0);
        let p11 = at(y0 + 1, x0 + 1);
        let top = p00 + (p01 - p00) * fx;
        let bottom = p10 + (p11 - p10) * fx;
        *o = top + (bottom - top) * fy;
    }
}

/// `out(x) = source(x + flow(x))`, channel-wise, zero outside the source.
pub fn warp_by_flow<T: Real>(source: &RasterImage<T>, flow: &FlowField<T>) -> Result<RasterImage<T>> {
    if (source.height(), source.width()) != flow.dims() {
        return Err(Error::InvalidArgument(format!(
            "warp: source {}x{} vs flow {}x{}",
            source.height(),
            source.width(),
            flow.height(),
            flow.width()
        )));
    }
    let (h, w, c) = source.dims();
    let mut out = RasterImage::zeros(h, w, c);
    if out.is_empty() {
        return Ok(out);
    }
    out.data_mut()
        .par_chunks_mut(w * c)
        .enumerate()
        .for_each(|(y, row)| {
            let yr = T::lit(y as f64);
            for x in 0..w {
                let (u, v) = flow.get(y, x);
                let xr = T::lit(x as f64);
                bilinear_sample_into(source, xr + u, yr + v, &mut row[x * c..(x + 1) * c]);
            }
        });
    Ok(out)
}

/// Corner-aligned bilinear upsampling by an integer factor.
pub fn upsample_bilinear<T: Real>(map: &RasterImage<T>, factor: usize) -> Result<RasterImage<T>> {
    if factor == 0 {
        return Err(Error::InvalidArgument("upsampling factor must be >= 1".into()));
    }
    let (h, w, c) = map.dims();
    let (oh, ow) = (h * factor, w * factor);
    let src_coord = |o: usize, n: usize| -> T {
        if n <= 1 || n * factor <= 1 {
            T::zero()
        } else {
            T::narrow(o as f64 * (n - 1) as f64 / (n * factor - 1) as f64)
        }
    };
    let xs: Vec<T> = (0..ow).map(|o| src_coord(o, w)).collect();
    let mut out = RasterImage::zeros(oh, ow, c);
    if out.is_empty() {
        return Ok(out);
    }
    out.data_mut()
        .par_chunks_mut(ow * c)
        .enumerate()
        .for_each(|(y, row)| {
            let sy = src_coord(y, h);
            for (x, &sx) in xs.iter().enumerate() {
                bilinear_sample_into(map, sx, sy, &mut row[x * c..(x + 1) * c]);
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two() -> RasterImage<f32> {
        RasterImage::from_vec(2, 2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn sample_grid_point() {
        assert_eq!(bilinear_sample(&two_by_two(), 0.0, 0.0), vec![0.0]);
        assert_eq!(bilinear_sample(&two_by_two(), 1.0, 1.0), vec![3.0]);
    }

    #[test]
    fn sample_center_is_mean_of_corners() {
        // (0 + 1 + 2 + 3) / 4
        assert_eq!(bilinear_sample(&two_by_two(), 0.5, 0.5), vec![1.5]);
    }

    #[test]
    fn sample_far_outside_is_zero() {
        assert_eq!(bilinear_sample(&two_by_two(), -5.0, -5.0), vec![0.0]);
        assert_eq!(bilinear_sample(&two_by_two(), f32::NAN, 0.0), vec![0.0]);
        assert_eq!(bilinear_sample(&two_by_two(), 1e30, 0.0), vec![0.0]);
    }

    #[test]
    fn sample_edge_blends_with_zero_padding() {
        // x = 1.5 sits halfway between column 1 and the zero pad.
        assert_eq!(bilinear_sample(&two_by_two(), 1.5, 0.0), vec![0.5]);
        assert_eq!(bilinear_sample(&two_by_two(), -0.5, 1.0), vec![1.0]);
    }

    #[test]
    fn warp_zero_flow_is_identity() {
        let img = RasterImage::<f32>::from_fn(5, 7, 3, |y, x, c| (y * 31 + x * 7 + c) as f32 * 0.013);
        let out = warp_by_flow(&img, &FlowField::zeros(5, 7)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn warp_constant_shift_right() {
        let img = RasterImage::<f32>::from_fn(4, 4, 1, |y, x, _| (y * 4 + x) as f32);
        let out = warp_by_flow(&img, &FlowField::constant(4, 4, 1.0, 0.0)).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                // Oracle: one column to the right, zero past the last column.
                let expect = if x + 1 < 4 { img.get(y, x + 1, 0) } else { 0.0 };
                assert_eq!(out.get(y, x, 0), expect);
            }
        }
    }

    #[test]
    fn warp_dimension_mismatch() {
        let img = RasterImage::<f32>::zeros(4, 4, 1);
        assert!(matches!(
            warp_by_flow(&img, &FlowField::zeros(4, 5)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn upsample_constant_and_identity() {
        let m = RasterImage::<f32>::filled(3, 5, 2, 0.7);
        let up = upsample_bilinear(&m, 4).unwrap();
        assert_eq!(up.dims(), (12, 20, 2));
        assert!(up.data().iter().all(|&v| v == 0.7));

        let r = RasterImage::<f32>::from_fn(3, 4, 1, |y, x, _| (y * 10 + x) as f32 * 0.1);
        assert_eq!(upsample_bilinear(&r, 1).unwrap(), r);
        assert!(upsample_bilinear(&r, 0).is_err());
    }

    #[test]
    fn upsample_column_ramp() {
        let m = RasterImage::<f64>::from_vec(2, 2, 1, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let up = upsample_bilinear(&m, 2).unwrap();
        // Corner-aligned: output column o samples input x = o / 3.
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for y in 0..4 {
            for (x, &e) in expect.iter().enumerate() {
                assert!((up.get(y, x, 0) - e).abs() < 1e-12);
            }
        }
    }

    fn raster_strategy(h: usize, w: usize) -> impl Strategy<Value = RasterImage<f32>> {
        proptest::collection::vec(-1.0f32..1.0, h * w * 2)
            .prop_map(move |d| RasterImage::from_vec(h, w, 2, d).unwrap())
    }

    proptest! {
        #[test]
        fn warp_is_linear_in_image(
            a in raster_strategy(6, 5),
            b in raster_strategy(6, 5),
            flow in proptest::collection::vec(-3.0f32..3.0, 6 * 5 * 2),
            sa in -2.0f32..2.0,
            sb in -2.0f32..2.0,
        ) {
            let flow = FlowField::from_vec(6, 5, flow).unwrap();
            let mix = a.zip_map(&b, |x, y| sa * x + sb * y).unwrap();
            let lhs = warp_by_flow(&mix, &flow).unwrap();
            let wa = warp_by_flow(&a, &flow).unwrap();
            let wb = warp_by_flow(&b, &flow).unwrap();
            let rhs = wa.zip_map(&wb, |x, y| sa * x + sb * y).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-5);
        }

        #[test]
        fn sampling_is_lipschitz(
            img in raster_strategy(5, 5),
            x in -0.5f32..4.5,
            y in -0.5f32..4.5,
            dx in -0.01f32..0.01,
            dy in -0.01f32..0.01,
        ) {
            let max = img.data().iter().fold(0.0f32, |m, v| m.max(v.abs()));
            let p = bilinear_sample(&img, x, y);
            let q = bilinear_sample(&img, x + dx, y + dy);
            let eps = dx.abs().max(dy.abs());
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() <= 2.0 * eps * 2.0 * max + 1e-5);
            }
        }
    }
}
