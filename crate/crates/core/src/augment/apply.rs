use super::image::Image;
use super::ops::{AppliedAug, AugOp};
use crate::error::Result;

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn luminance(rgb: &[u8]) -> f64 {
    (0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64).round()
}

/// Resample through an inverse map from output pixel to source position.
/// Bilinear, with pixels outside the source treated as black.
fn warp(img: &Image, inverse: impl Fn(f64, f64) -> (f64, f64)) -> Image {
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();
    let mut out = vec![0u8; src.len()];
    let fetch = |x: i64, y: i64, c: usize| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            src[(y as usize * w + x as usize) * 3 + c] as f64
        }
    };
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inverse(x as f64, y as f64);
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            for c in 0..3 {
                let top = fetch(x0, y0, c) * (1.0 - fx) + fetch(x0 + 1, y0, c) * fx;
                let bottom = fetch(x0, y0 + 1, c) * (1.0 - fx) + fetch(x0 + 1, y0 + 1, c) * fx;
                out[(y * w + x) * 3 + c] = clamp_u8(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    img.with_pixels(out)
}

/// `degenerate + factor * (img - degenerate)`, clamped.
fn blend(img: &Image, degenerate: &[u8], factor: f64) -> Image {
    let out = img
        .pixels()
        .iter()
        .zip(degenerate)
        .map(|(&v, &d)| clamp_u8(d as f64 + factor * (v as f64 - d as f64)))
        .collect();
    img.with_pixels(out)
}

/// 3x3 smoothing with weights 1 around a centre weight of 5; the one-pixel
/// border keeps its original values.
fn smooth(img: &Image) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();
    let mut out = src.to_vec();
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            for c in 0..3 {
                let mut acc = 0u32;
                for dy in 0..3 {
                    for dx in 0..3 {
                        let weight = if dx == 1 && dy == 1 { 5 } else { 1 };
                        acc += weight * src[((y + dy - 1) * w + x + dx - 1) * 3 + c] as u32;
                    }
                }
                out[(y * w + x) * 3 + c] = clamp_u8(acc as f64 / 13.0);
            }
        }
    }
    out
}

fn map_channels(img: &Image, luts: &[[u8; 256]; 3]) -> Image {
    let out = img.pixels().iter().enumerate().map(|(i, &v)| luts[i % 3][v as usize]).collect();
    img.with_pixels(out)
}

fn channel_histograms(img: &Image) -> [[u64; 256]; 3] {
    let mut hist = [[0u64; 256]; 3];
    for (i, &v) in img.pixels().iter().enumerate() {
        hist[i % 3][v as usize] += 1;
    }
    hist
}

fn identity_lut() -> [u8; 256] {
    std::array::from_fn(|i| i as u8)
}

fn autocontrast(img: &Image) -> Image {
    let hist = channel_histograms(img);
    let luts = hist.map(|h| {
        let lo = h.iter().position(|&c| c > 0).unwrap_or(0);
        let hi = h.iter().rposition(|&c| c > 0).unwrap_or(255);
        if hi <= lo {
            return identity_lut();
        }
        let span = (hi - lo) as f64;
        std::array::from_fn(|v| {
            let v = v.clamp(lo, hi);
            clamp_u8((v - lo) as f64 * 255.0 / span)
        })
    });
    map_channels(img, &luts)
}

/// Cumulative-distribution equalization, per channel, with the step taken
/// over all pixels except those in the top occupied bin.
fn equalize(img: &Image) -> Image {
    let hist = channel_histograms(img);
    let luts = hist.map(|h| {
        let occupied: Vec<usize> = (0..256).filter(|&v| h[v] > 0).collect();
        if occupied.len() <= 1 {
            return identity_lut();
        }
        let total: u64 = h.iter().sum();
        let step = (total - h[*occupied.last().unwrap()]) / 255;
        if step == 0 {
            return identity_lut();
        }
        let mut lut = [0u8; 256];
        let mut acc = step / 2;
        for (v, slot) in lut.iter_mut().enumerate() {
            *slot = (acc / step).min(255) as u8;
            acc += h[v];
        }
        lut
    });
    map_channels(img, &luts)
}

/// Apply one recorded augmentation. Magnitude-based ops at magnitude 0 return
/// an exact copy without resampling.
pub fn apply(img: &Image, aug: &AppliedAug) -> Image {
    let m = aug.magnitude.unwrap_or(0.0);
    let s = aug.signed_magnitude();
    if aug.op.signed() && m == 0.0 {
        return img.clone();
    }
    let cx = (img.width() as f64 - 1.0) / 2.0;
    let cy = (img.height() as f64 - 1.0) / 2.0;
    match aug.op {
        AugOp::Identity => img.clone(),
        AugOp::ShearX => warp(img, |x, y| (x - s * (y - cy), y)),
        AugOp::ShearY => warp(img, |x, y| (x, y - s * (x - cx))),
        AugOp::TranslateX => warp(img, |x, y| (x - s, y)),
        AugOp::TranslateY => warp(img, |x, y| (x, y - s)),
        AugOp::Rotate => {
            // Counter-clockwise on screen for positive angles (y points down).
            let (sin, cos) = s.to_radians().sin_cos();
            warp(img, |x, y| {
                let (dx, dy) = (x - cx, y - cy);
                (cx + cos * dx - sin * dy, cy + sin * dx + cos * dy)
            })
        }
        AugOp::Brightness => blend(img, &vec![0; img.pixels().len()], 1.0 + s),
        AugOp::Color => {
            let gray: Vec<u8> =
                img.pixels().chunks_exact(3).flat_map(|p| [luminance(p) as u8; 3]).collect();
            blend(img, &gray, 1.0 + s)
        }
        AugOp::Contrast => {
            let n = (img.width() * img.height()) as f64;
            let mean = img.pixels().chunks_exact(3).map(luminance).sum::<f64>() / n;
            blend(img, &vec![clamp_u8(mean); img.pixels().len()], 1.0 + s)
        }
        AugOp::Sharpness => blend(img, &smooth(img), 1.0 + s),
        AugOp::Posterize => {
            let mask = 0xFFu8 << (8 - m as u32);
            img.with_pixels(img.pixels().iter().map(|v| v & mask).collect())
        }
        AugOp::Solarize => {
            img.with_pixels(img.pixels().iter().map(|&v| if v as f64 >= m { 255 - v } else { v }).collect())
        }
        AugOp::AutoContrast => autocontrast(img),
        AugOp::Equalize => equalize(img),
    }
}

/// Validate `(op, magnitude, sign)` and apply it.
pub fn apply_op(img: &Image, op: AugOp, magnitude: Option<f64>, sign: i8) -> Result<Image> {
    Ok(apply(img, &AppliedAug::new(op, magnitude, sign)?))
}
