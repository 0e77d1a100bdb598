//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

// Checks are phrased as `!(value < limit)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regchange::dataforge::{
    derive_change_map, list_samples, read_sample, synthesize_pair, AffineParams, BuildingPolygon, DamageClass,
    RegisteredPair,
};
use regchange::io::{decode_flo, encode_flo, read_raw_raster};
use regchange::metrics::{metrics_from_confusion, pck, relaxed_confusion, RelaxedConfusion};
use regchange::net::{
    class_balanced_ce, conv4d, e2ecd_forward, flow_epe, global_correlation, init_weights, local_correlation,
    mutual_matching, neighborhood_consensus, softargmax_flow, ArchConfig, ChangeProbMap, Corr4D, WeightStore,
};
use regchange::numerics::{upsample_flow, warp_by_flow, AffineTransform2D, BinaryMask, FlowField, RasterImage};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    } else {
        Ok(t)
    }
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------- metrics

fn random_mask(rng: &mut ChaCha8Rng, h: usize, w: usize, p: f64) -> BinaryMask {
    BinaryMask::from_fn(h, w, |_, _| rng.gen_bool(p))
}

fn random_instance(rng: &mut ChaCha8Rng, max: usize) -> (BinaryMask, BinaryMask, BinaryMask) {
    let (h, w) = (rng.gen_range(1..=max), rng.gen_range(1..=max));
    let (pp, pg, pv) = (rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.4), rng.gen_range(0.5..1.0));
    (random_mask(rng, h, w, pp), random_mask(rng, h, w, pg), random_mask(rng, h, w, pv))
}

fn plain_confusion(pred: &BinaryMask, gt: &BinaryMask, valid: &BinaryMask) -> [u64; 4] {
    let mut c = [0u64; 4];
    for i in 0..valid.values().len() {
        if valid.values()[i] == 1 {
            let slot = match (gt.values()[i], pred.values()[i]) {
                (1, 1) => 0,
                (1, _) => 1,
                (_, 1) => 2,
                _ => 3,
            };
            c[slot] += 1;
        }
    }
    c
}

fn scan_oracle(pred: &BinaryMask, gt: &BinaryMask, valid: &BinaryMask, r: usize) -> RelaxedConfusion {
    let (h, w) = gt.dims();
    let ri = r as isize;
    let mut c = RelaxedConfusion::empty(r);
    let mut keep = vec![true; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            if valid.values()[i] == 0 || gt.values()[i] == 0 {
                continue;
            }
            let mut hit = false;
            for yy in (y - ri).max(0)..=(y + ri).min(h as isize - 1) {
                for xx in (x - ri).max(0)..=(x + ri).min(w as isize - 1) {
                    let j = yy as usize * w + xx as usize;
                    hit |= valid.values()[j] == 1 && pred.values()[j] == 1;
                    if valid.values()[j] == 1 && gt.values()[j] == 0 {
                        keep[j] = false;
                    }
                }
            }
            if hit {
                c.true_pos += 1;
            } else {
                c.false_neg += 1;
            }
        }
    }
    for i in 0..h * w {
        if valid.values()[i] == 1 && gt.values()[i] == 0 {
            if !keep[i] {
                c.masked_out += 1;
            } else if pred.values()[i] == 1 {
                c.false_pos += 1;
            } else {
                c.true_neg += 1;
            }
        }
    }
    c
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for n in 0..1000 {
        let (p, g, v) = random_instance(&mut rng, 32);
        let c = relaxed_confusion(&p, &g, &v, 0).map_err(text)?;
        ensure!(
            [c.true_pos, c.false_neg, c.false_pos, c.true_neg] == plain_confusion(&p, &g, &v) && c.masked_out == 0,
            "instance {n}: {c:?}"
        );
    }
    Ok(format!("1000 instances in {:.2?}", within(Duration::from_secs(10), start)?))
}

fn suite_2() -> Vec<(BinaryMask, BinaryMask, BinaryMask)> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    (0..500).map(|_| random_instance(&mut rng, 8)).collect()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    for (n, (p, g, v)) in suite_2().iter().enumerate() {
        for r in 0..=3 {
            let got = relaxed_confusion(p, g, v, r).map_err(text)?;
            let want = scan_oracle(p, g, v, r);
            ensure!(got == want, "instance {n}, r={r}: {got:?} vs {want:?}");
        }
    }
    Ok(format!("500 instances x 4 radii in {:.2?}", within(Duration::from_secs(30), start)?))
}

fn criterion_3() -> Outcome {
    let mut violations = 0;
    for (p, g, v) in suite_2() {
        let recalls: Vec<_> = (0..=3)
            .map(|r| metrics_from_confusion(&relaxed_confusion(&p, &g, &v, r).unwrap()).recall)
            .collect();
        violations += recalls
            .windows(2)
            .filter(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a))
            .count();
    }
    ensure!(violations == 0, "{violations} violations");
    Ok("0 violations over 500 instances".into())
}

fn criterion_4() -> Outcome {
    let (h, w) = (100, 100);
    let delta = 0.05;
    let valid = BinaryMask::ones(h, w);
    let zero = FlowField::<f32>::zeros(h, w);
    let gt = FlowField::<f32>::from_fn(h, w, |y, x| (x as f32 * 0.01, -(y as f32) * 0.02));
    let cases = [
        (pck(&gt, &gt, &valid, delta), 100.0, "pred = gt"),
        (pck(&FlowField::constant(h, w, 4.0, 0.0), &zero, &valid, delta), 100.0, "error threshold - 1"),
        (pck(&FlowField::constant(h, w, 0.0, -6.0), &zero, &valid, delta), 0.0, "error threshold + 1"),
        (pck(&FlowField::constant(h, w, 3.0, 4.0), &zero, &valid, delta), 100.0, "error exactly at threshold"),
    ];
    for (got, want, label) in cases {
        let got = got.map_err(text)?;
        ensure!(got == want, "{label}: {got} != {want}");
    }
    Ok("threshold 5 px on 100x100, boundary exact".into())
}

// -------------------------------------------------------------- synthesis

fn smooth_image(h: usize, w: usize) -> RasterImage<f32> {
    let tau = std::f32::consts::TAU;
    RasterImage::from_fn(h, w, 3, |y, x, c| {
        let (fy, fx) = (y as f32 / h as f32, x as f32 / w as f32);
        0.5 + 0.2 * (tau * (1.5 * fx + 0.3 * c as f32)).sin() * (tau * fy).cos() + 0.1 * (tau * (fx - fy)).sin()
    })
}

fn bare_pair(image: RasterImage<f32>) -> RegisteredPair {
    RegisteredPair {
        id: "a".into(),
        event_name: "e".into(),
        pre_image: image.clone(),
        post_image: image,
        pre_buildings: vec![],
        post_buildings: vec![],
    }
}

fn valid_mae(pair: &RegisteredPair, affine: &AffineTransform2D<f64>) -> Result<f64, String> {
    let s = synthesize_pair(pair, affine).map_err(text)?;
    let back = warp_by_flow(&s.source_image, &s.gt_flow).map_err(text)?;
    let (h, w, c) = back.dims();
    let (mut sum, mut n) = (0.0f64, 0usize);
    for y in 0..h {
        for x in 0..w {
            if s.validity_mask.get(y, x) {
                for k in 0..c {
                    sum += (back.get(y, x, k) - pair.pre_image.get(y, x, k)).abs() as f64;
                    n += 1;
                }
            }
        }
    }
    ensure!(n > 0, "empty validity mask");
    Ok(sum / n as f64)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let pair = bare_pair(smooth_image(96, 96));
    let id = synthesize_pair(&pair, &AffineTransform2D::identity()).map_err(text)?;
    ensure!(id.gt_flow.data().iter().all(|&v| v == 0.0), "identity flow is not zero");
    ensure!(id.validity_mask.count_ones() == 96 * 96, "identity mask is not all ones");
    for (tx, ty) in [(1.0, 0.0), (0.0, -2.0), (-5.0, 3.0), (7.0, 7.0)] {
        let mae = valid_mae(&pair, &AffineTransform2D::translation(tx, ty))?;
        ensure!(mae == 0.0, "translation ({tx}, {ty}): MAE {mae}");
    }
    let rot = AffineParams {
        rotation_deg: 10.0,
        scale: 1.0,
        shear_deg: 0.0,
        tx: 0.0,
        ty: 0.0,
    };
    let mae = valid_mae(&pair, &rot.to_transform(96, 96))?;
    ensure!(mae < 0.02, "10 degree rotation MAE {mae}");
    Ok(format!("rotation MAE {mae:.5}, {:.2?}", within(Duration::from_secs(20), start)?))
}

fn criterion_6(pipeline: &Pipeline) -> Outcome {
    let corpus = pipeline.root_a.join("syn");
    let stems = list_samples(&corpus).map_err(text)?;
    ensure!(!stems.is_empty(), "no synthesized samples");
    for stem in &stems {
        let (sample, meta) = read_sample(&corpus, stem).map_err(text)?;
        let inverse = AffineTransform2D::new(meta.affine).invert().map_err(text)?;
        let analytic = FlowField::from_fn(meta.height, meta.width, |y, x| {
            let (sx, sy) = inverse.apply(x as f64, y as f64);
            ((sx - x as f64) as f32, (sy - y as f64) as f32)
        });
        let epe = flow_epe(&sample.gt_flow, &analytic, &sample.validity_mask).map_err(text)?;
        ensure!(epe == 0.0, "{stem}: EPE {epe}");
    }
    Ok(format!("{} samples, EPE 0", stems.len()))
}

fn random_polygon(rng: &mut ChaCha8Rng, h: usize, w: usize, damage: DamageClass) -> BuildingPolygon {
    if rng.gen_bool(0.5) {
        let (x0, y0) = (rng.gen_range(0..w) as f64, rng.gen_range(0..h) as f64);
        BuildingPolygon::rect(x0, y0, x0 + rng.gen_range(1..9) as f64, y0 + rng.gen_range(1..9) as f64, damage)
    } else {
        let n = rng.gen_range(3..8);
        let v = (0..n)
            .map(|_| (rng.gen_range(-3.0..w as f64 + 3.0), rng.gen_range(-3.0..h as f64 + 3.0)))
            .collect();
        BuildingPolygon::new(v, damage).unwrap()
    }
}

fn covers(v: &[(f64, f64)], px: f64, py: f64) -> bool {
    let mut odd = false;
    let mut prev = v[v.len() - 1];
    for &cur in v {
        if (cur.1 > py) != (prev.1 > py) && px < (prev.0 - cur.0) * (py - cur.1) / (prev.1 - cur.1) + cur.0 {
            odd = !odd;
        }
        prev = cur;
    }
    odd
}

fn criterion_15() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(115);
    let damages = [DamageClass::NoDamage, DamageClass::MinorDamage, DamageClass::MajorDamage, DamageClass::Destroyed];
    for scene in 0..100 {
        let (h, w) = (rng.gen_range(4..28), rng.gen_range(4..28));
        let pre: Vec<_> = (0..rng.gen_range(0..6))
            .map(|_| random_polygon(&mut rng, h, w, DamageClass::NoDamage))
            .collect();
        let post: Vec<_> = (0..rng.gen_range(0..6))
            .map(|_| {
                let d = damages[rng.gen_range(0..4)];
                random_polygon(&mut rng, h, w, d)
            })
            .collect();
        let got = derive_change_map(&pre, &post, h, w);
        for y in 0..h {
            for x in 0..w {
                let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
                let was = pre.iter().any(|p| covers(&p.vertices, cx, cy));
                let now = post.iter().rev().find(|p| covers(&p.vertices, cx, cy));
                let changed = match now {
                    None => was,
                    Some(b) => !was || b.damage != DamageClass::NoDamage,
                };
                ensure!(got.get(y, x) == changed, "scene {scene}, pixel ({y}, {x})");
            }
        }
    }
    Ok("100 scenes exact".into())
}

// ----------------------------------------------------------------- kernels

fn features(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> RasterImage<f32> {
    RasterImage::from_fn(h, w, c, |_, _, _| rng.gen_range(-1.0..1.0))
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

fn global_worst(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = [0; 4].map(|_| rng.gen_range(1..5));
        let c = rng.gen_range(1..8);
        let t = features(rng, d[0], d[1], c);
        let s = features(rng, d[2], d[3], c);
        let got = global_correlation(&t, &s).map_err(text)?;
        for i in 0..d[0] {
            for j in 0..d[1] {
                for k in 0..d[2] {
                    for l in 0..d[3] {
                        let (a, b) = (t.pixel(i, j), s.pixel(k, l));
                        let (na, nb) = (dot(a, a).sqrt(), dot(b, b).sqrt());
                        let want = if na < 1e-12 || nb < 1e-12 { 0.0 } else { dot(a, b) / (na * nb) };
                        worst = worst.max((got.get(i, j, k, l) as f64 - want).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn local_worst(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (h, w, c, r) = (rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..4));
        let t = features(rng, h, w, c);
        let s = features(rng, h, w, c);
        let got = local_correlation(&t, &s, r).map_err(text)?;
        let ri = r as isize;
        for y in 0..h as isize {
            for x in 0..w as isize {
                for dy in -ri..=ri {
                    for dx in -ri..=ri {
                        let (sy, sx) = (y + dy, x + dx);
                        let inside = (0..h as isize).contains(&sy) && (0..w as isize).contains(&sx);
                        let want = if inside {
                            dot(t.pixel(y as usize, x as usize), s.pixel(sy as usize, sx as usize))
                        } else {
                            0.0
                        };
                        let ch = ((dy + ri) * (2 * ri + 1) + dx + ri) as usize;
                        worst = worst.max((got.scores.get(y as usize, x as usize, ch) as f64 - want).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn conv4d_worst(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = [0; 4].map(|_| rng.gen_range(1..5));
        let (ci, co) = (rng.gen_range(1..3), rng.gen_range(1..3));
        let n = d.iter().product::<usize>() * ci;
        let input = Corr4D::from_vec(d, ci, (0..n).map(|_| rng.gen_range(-1.0f32..1.0)).collect()).map_err(text)?;
        let kernel: Vec<f32> = (0..co * ci * 81).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let got = conv4d(&input, &kernel, co).map_err(text)?;
        for i in 0..d[0] {
            for j in 0..d[1] {
                for k in 0..d[2] {
                    for l in 0..d[3] {
                        let base = [i, j, k, l];
                        for o in 0..co {
                            let mut acc = 0.0f64;
                            for c in 0..ci {
                                for t in 0..81 {
                                    let off = [t / 27, (t / 9) % 3, (t / 3) % 3, t % 3];
                                    let p: Vec<isize> =
                                        (0..4).map(|q| base[q] as isize + off[q] as isize - 1).collect();
                                    if (0..4).any(|q| p[q] < 0 || p[q] >= d[q] as isize) {
                                        continue;
                                    }
                                    let v = input.get_c(p[0] as usize, p[1] as usize, p[2] as usize, p[3] as usize, c);
                                    acc += kernel[(o * ci + c) * 81 + t] as f64 * v as f64;
                                }
                            }
                            worst = worst.max((got.get_c(i, j, k, l, o) as f64 - acc).abs());
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let g = global_worst(&mut rng)?;
    let l = local_worst(&mut rng)?;
    let c = conv4d_worst(&mut rng)?;
    for (name, worst) in [("global correlation", g), ("local correlation", l), ("conv4d", c)] {
        ensure!(worst < 1e-5, "{name}: max abs diff {worst:e}");
    }
    Ok(format!(
        "max abs diff {:.1e}, 150 instances in {:.2?}",
        g.max(l).max(c),
        within(Duration::from_secs(60), start)?
    ))
}

fn argmax(v: &[f32]) -> (usize, f32) {
    v.iter()
        .enumerate()
        .fold((0, f32::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
}

fn criterion_8() -> Outcome {
    let c = Corr4D::<f32>::from_vec([1, 2, 1, 2], 1, vec![1.0, 0.5, 0.5, 0.25]).map_err(text)?;
    let m = mutual_matching(&c);
    ensure!(m.data() == [1.0, 0.25, 0.25, 0.0625], "hand example gave {:?}", m.data());
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for n in 0..200 {
        let d = [0; 4].map(|_| rng.gen_range(1..5));
        let c = Corr4D::<f32>::from_fn(d, |_, _, _, _| rng.gen_range(-1.0..1.0));
        let clamped: Vec<f32> = c.data().iter().map(|v| v.max(0.0)).collect();
        let m = mutual_matching(&c);
        ensure!(
            m.data().iter().zip(&clamped).all(|(a, b)| a <= b),
            "volume {n}: suppression violated"
        );
        let (top, top_v) = argmax(&clamped);
        if top_v > 0.0 {
            ensure!(argmax(m.data()).1 == m.data()[top], "volume {n}: global argmax moved");
        }
    }
    Ok("hand example exact, 200 volumes".into())
}

fn criterion_9() -> Outcome {
    let arch = ArchConfig::default();
    let weights = init_weights(9, &arch);
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = [0; 4].map(|_| rng.gen_range(1..5));
        let c = rng.gen_range(1..9);
        let a = features(&mut rng, d[0], d[1], c);
        let b = features(&mut rng, d[2], d[3], c);
        let ab = global_correlation(&a, &b).map_err(text)?;
        let ba = global_correlation(&b, &a).map_err(text)?;
        let nab = neighborhood_consensus(&mutual_matching(&ab), &weights, &arch).map_err(text)?;
        let nba = neighborhood_consensus(&mutual_matching(&ba), &weights, &arch).map_err(text)?;
        worst = worst.max(nba.max_abs_diff(&nab.transpose()));
    }
    ensure!(worst < 1e-5, "max abs diff {worst:e}");
    Ok(format!("50 pairs, max abs diff {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let n = 8;
    for dy in -3isize..=3 {
        for dx in -3isize..=3 {
            let c = Corr4D::<f32>::from_fn([n, n, n, n], |i, j, k, l| {
                if k as isize == i as isize + dy && l as isize == j as isize + dx {
                    1e6
                } else {
                    0.0
                }
            });
            let f = softargmax_flow(&c, 1.0).map_err(text)?;
            for i in 0..n as isize {
                for j in 0..n as isize {
                    if (0..n as isize).contains(&(i + dy)) && (0..n as isize).contains(&(j + dx)) {
                        let (u, v) = f.get(i as usize, j as usize);
                        ensure!(
                            (u as f64 - dx as f64).abs() < 1e-3 && (v as f64 - dy as f64).abs() < 1e-3,
                            "d=({dx},{dy}) at ({i},{j}): ({u},{v})"
                        );
                    }
                }
            }
        }
    }
    let uniform = softargmax_flow(&Corr4D::<f32>::zeros([n, n, n, n], 1), 0.5).map_err(text)?;
    let centre = (n as f64 - 1.0) / 2.0;
    for i in 0..n {
        for j in 0..n {
            let (u, v) = uniform.get(i, j);
            ensure!(
                (u as f64 - (centre - j as f64)).abs() < 1e-4 && (v as f64 - (centre - i as f64)).abs() < 1e-4,
                "uniform at ({i},{j}): ({u},{v})"
            );
        }
    }
    Ok("49 displacements and uniform centroid".into())
}

fn criterion_11() -> Outcome {
    let arch = ArchConfig::default();
    let weights = init_weights(11, &arch);
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let a = RasterImage::from_fn(96, 64, 3, |_, _, _| rng.gen::<f32>());
    let b = RasterImage::from_fn(96, 64, 3, |_, _, _| rng.gen::<f32>());
    let out = e2ecd_forward(&a, &b, &weights, &arch).map_err(text)?;
    for l in 0..3 {
        let up = upsample_flow(&out.level_flows[l + 1], 2).map_err(text)?;
        ensure!(out.level_flows[l] == up, "level {} differs from upsampled level {}", l + 1, l + 2);
    }
    Ok("levels 3, 2, 1 bit-equal".into())
}

fn criterion_12(pipeline: &Pipeline) -> Outcome {
    let corpus = pipeline.root_a.join("syn");
    let arch = ArchConfig::default();
    let weights = init_weights(0, &arch);
    let mut worst = 0.0f64;
    let mut maps = 0;
    for stem in list_samples(&corpus).map_err(text)? {
        let (s, _) = read_sample(&corpus, &stem).map_err(text)?;
        let out = e2ecd_forward(&s.source_image, &s.target_image, &weights, &arch).map_err(text)?;
        for p in out.level_changes.iter().chain(std::iter::once(&out.change)) {
            worst = worst.max(p.max_sum_error());
            maps += 1;
        }
        let path = pipeline.root_a.join("pred").join(format!("{stem}_prob.r32"));
        let written = ChangeProbMap::new(read_raw_raster(&path).map_err(text)?).map_err(text)?;
        worst = worst.max(written.max_sum_error());
        maps += 1;
    }
    ensure!(maps > 0, "no probability maps checked");
    ensure!(worst <= 1e-5, "max deviation {worst:e}");
    Ok(format!("{maps} maps, max |sum - 1| {worst:.1e}"))
}

fn criterion_13() -> Outcome {
    let gt = BinaryMask::from_fn(8, 8, |y, x| (x * 3 + y) % 5 == 0);
    let perfect = class_balanced_ce(&[ChangeProbMap::<f32>::from_labels(&gt)], &gt, &BinaryMask::ones(8, 8))
        .map_err(text)?;
    ensure!(perfect.abs() <= 1e-6, "perfect prediction loss {perfect}");
    // Labels [1, 0, 0, 0], changed probabilities [0.8, 0.3, 0.1, 0.5],
    // negative share 3/4: −(0.75·ln 0.8 + 0.25·(ln 0.7 + ln 0.9 + ln 0.5)) / 4.
    let hand = -(0.75 * 0.8f64.ln() + 0.25 * (0.7f64.ln() + 0.9f64.ln() + 0.5f64.ln())) / 4.0;
    let toy_gt = BinaryMask::from_vec(2, 2, vec![1, 0, 0, 0]).map_err(text)?;
    let probs = RasterImage::from_vec(2, 2, 2, vec![0.2f32, 0.8, 0.7, 0.3, 0.9, 0.1, 0.5, 0.5]).map_err(text)?;
    let toy = class_balanced_ce(&[ChangeProbMap::new(probs).map_err(text)?], &toy_gt, &BinaryMask::ones(2, 2))
        .map_err(text)?;
    ensure!((toy - hand).abs() <= 1e-6, "toy loss {toy} vs {hand}");
    Ok(format!("perfect {perfect:.1e}, toy {toy:.8}"))
}

// ---------------------------------------------------------------- pipeline

struct Pipeline {
    root_a: PathBuf,
    root_b: PathBuf,
    elapsed: Duration,
    exit_codes: Vec<(String, Option<i32>)>,
    _tmp: tempfile::TempDir,
}

fn run_pipeline(root: &Path) -> Vec<(String, Option<i32>)> {
    let bin = env!("CARGO_BIN_EXE_regchange");
    let steps: [&[&str]; 6] = [
        &["make-fixture", "--output", "reg", "--seed", "1"],
        &["synth", "--input", "reg", "--output", "syn", "--seed", "42"],
        &["forward", "--corpus", "syn", "--output", "pred", "--seed", "0"],
        &["eval", "--pred", "pred", "--gt", "syn", "--output", "eval"],
        &["stats", "--corpus", "syn", "--output", "stats"],
        &["inspect", "--corpus", "syn", "--pred", "pred", "--output", "panels"],
    ];
    steps
        .iter()
        .map(|args| {
            let out = Command::new(bin)
                .args(*args)
                .args(["--workers", "1"])
                .current_dir(root)
                .env("RUST_LOG", "warn")
                .output()
                .expect("binary runs");
            (args[0].to_string(), out.status.code())
        })
        .collect()
}

fn pipeline() -> Pipeline {
    let tmp = tempfile::tempdir().expect("temp dir");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let start = Instant::now();
    let exit_codes = run_pipeline(&a);
    let elapsed = start.elapsed();
    run_pipeline(&b);
    Pipeline {
        root_a: a,
        root_b: b,
        elapsed,
        exit_codes,
        _tmp: tmp,
    }
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn criterion_14(p: &Pipeline) -> Outcome {
    for (step, code) in &p.exit_codes {
        ensure!(*code == Some(0), "`{step}` exited with {code:?}");
    }
    ensure!(p.elapsed < Duration::from_secs(120), "pipeline took {:.2?}", p.elapsed);
    let (a, b) = (tree(&p.root_a), tree(&p.root_b));
    ensure!(a.len() > 20, "only {} files produced", a.len());
    let differing: Vec<_> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    ensure!(a.len() == b.len() && differing.is_empty(), "reruns differ: {differing:?}");
    let report = a.get(Path::new("eval/report.csv")).ok_or("missing eval/report.csv")?;
    ensure!(report.starts_with(b"sample_id,radius,P,R,F1,IoU,OA,PCK\n"), "unexpected report header");

    let flow = FlowField::<f32>::from_fn(7, 5, |y, x| (x as f32 * 0.37 - 1.0, y as f32 * -2.5));
    let bytes = encode_flo(&flow);
    ensure!(encode_flo(&decode_flo(&bytes).map_err(text)?) == bytes, ".flo round trip changed bytes");

    let encoded = init_weights(14, &ArchConfig::default()).encode();
    ensure!(WeightStore::decode(&encoded).map_err(text)?.encode() == encoded, "weight round trip changed bytes");
    Ok(format!("{} files identical across reruns, pipeline {:.2?} on one worker", a.len(), p.elapsed))
}

fn main() {
    let shared = pipeline();
    type Check<'a> = (u32, &'a str, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        (1, "relaxed metrics at r=0 equal the plain confusion matrix", Box::new(criterion_1)),
        (2, "relaxed metrics equal the exhaustive neighbourhood scan", Box::new(criterion_2)),
        (3, "recall is non-decreasing in the radius", Box::new(criterion_3)),
        (4, "PCK threshold boundary", Box::new(criterion_4)),
        (5, "synthesis round trip", Box::new(criterion_5)),
        (6, "ground-truth flow equals the analytic inverse map", Box::new(|| criterion_6(&shared))),
        (7, "correlation and 4D convolution kernels match nested loops", Box::new(criterion_7)),
        (8, "mutual matching hand example, suppression, argmax", Box::new(criterion_8)),
        (9, "consensus does not depend on image order", Box::new(criterion_9)),
        (10, "soft-argmax recovers displacements and the centroid", Box::new(criterion_10)),
        (11, "fresh residual heads pass the upsampled flow through", Box::new(criterion_11)),
        (12, "change probabilities sum to one", Box::new(|| criterion_12(&shared))),
        (13, "class-balanced loss sanity", Box::new(criterion_13)),
        (14, "determinism, file round trips, pipeline runtime", Box::new(|| criterion_14(&shared))),
        (15, "change map equals the per-pixel polygon oracle", Box::new(criterion_15)),
    ];
    let mut failed = 0;
    for (n, name, check) in &checks {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {n:>2}: PASS  {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
