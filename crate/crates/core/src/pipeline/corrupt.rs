use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::augment::Image;
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    GaussianNoise,
    Occlusion,
    Resolution,
    Fog,
    MotionBlur,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 5] = [
        CorruptionKind::GaussianNoise,
        CorruptionKind::Occlusion,
        CorruptionKind::Resolution,
        CorruptionKind::Fog,
        CorruptionKind::MotionBlur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::Occlusion => "occlusion",
            CorruptionKind::Resolution => "resolution",
            CorruptionKind::Fog => "fog",
            CorruptionKind::MotionBlur => "motion_blur",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Axis-aligned pixel rectangle `[x, x + w) x [y, y + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corrupted {
    pub image: Image,
    /// The filled rectangle, for occlusion only.
    pub occlusion: Option<Rect>,
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn gaussian_noise(img: &Image, sigma: f64, rng: &mut Rng) -> Image {
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let out = img.pixels().iter().map(|&v| clamp_u8(v as f64 + normal.sample(rng))).collect();
    Image::new(img.width(), img.height(), out).expect("same shape")
}

fn occlude(img: &Image, severity: f64, rng: &mut Rng) -> (Image, Rect) {
    let (w, h) = (img.width(), img.height());
    let side = (severity * 0.25).sqrt();
    let rw = ((w as f64 * side).round() as usize).clamp(1, w);
    let rh = ((h as f64 * side).round() as usize).clamp(1, h);
    let rect = Rect { x: rng.random_range(0..=w - rw), y: rng.random_range(0..=h - rh), w: rw, h: rh };
    let mut out = img.clone();
    for y in rect.y..rect.y + rh {
        for x in rect.x..rect.x + rw {
            out.set_pixel(x, y, [128; 3]);
        }
    }
    (out, rect)
}

/// Average over `f x f` blocks, then paint each block with its mean.
fn pixelate(img: &Image, f: usize) -> Image {
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for by in (0..h).step_by(f) {
        for bx in (0..w).step_by(f) {
            let (ey, ex) = ((by + f).min(h), (bx + f).min(w));
            let count = ((ey - by) * (ex - bx)) as f64;
            let mut sum = [0.0f64; 3];
            for y in by..ey {
                for x in bx..ex {
                    let p = img.pixel(x, y);
                    (0..3).for_each(|c| sum[c] += p[c] as f64);
                }
            }
            let mean = sum.map(|s| clamp_u8(s / count));
            for y in by..ey {
                for x in bx..ex {
                    out.set_pixel(x, y, mean);
                }
            }
        }
    }
    out
}

/// Value noise in `[0, 1]`: uniform values on a coarse lattice, bilinearly
/// interpolated with a smoothstep.
fn smooth_field(w: usize, h: usize, cell: usize, rng: &mut Rng) -> Vec<f64> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>()).collect();
    let ease = |t: f64| t * t * (3.0 - 2.0 * t);
    let mut field = Vec::with_capacity(w * h);
    for y in 0..h {
        let gy = y as f64 / cell as f64;
        let (y0, ty) = (gy.floor() as usize, ease(gy.fract()));
        for x in 0..w {
            let gx = x as f64 / cell as f64;
            let (x0, tx) = (gx.floor() as usize, ease(gx.fract()));
            let at = |i: usize, j: usize| lattice[j * gw + i];
            let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
            let bottom = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
            field.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    field
}

fn fog(img: &Image, severity: f64, rng: &mut Rng) -> Image {
    let (w, h) = (img.width(), img.height());
    let cell = (w.max(h) / 4).max(2);
    let field = smooth_field(w, h, cell, rng);
    let out = img
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let alpha = severity * field[i / 3];
            clamp_u8(v as f64 * (1.0 - alpha) + 255.0 * alpha)
        })
        .collect();
    Image::new(w, h, out).expect("same shape")
}

/// Horizontal box blur of odd or even `len`, replicating edge pixels.
fn motion_blur(img: &Image, len: usize) -> Image {
    let (w, h) = (img.width(), img.height());
    let before = (len - 1) / 2;
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut sum = [0.0f64; 3];
            for k in 0..len {
                let sx = (x + k).saturating_sub(before).min(w - 1);
                let p = img.pixel(sx, y);
                (0..3).for_each(|c| sum[c] += p[c] as f64);
            }
            out.set_pixel(x, y, sum.map(|s| clamp_u8(s / len as f64)));
        }
    }
    out
}

/// Degrade `img` by `kind` at `severity` in `[0, 1]`; severity 0 returns an
/// exact copy.
pub fn corrupt(img: &Image, kind: CorruptionKind, severity: f64, rng: &mut Rng) -> Result<Corrupted> {
    if !(0.0..=1.0).contains(&severity) {
        return Err(Error::out_of_range("severity", format!("{severity} not in [0, 1]")));
    }
    let plain = |image| Ok(Corrupted { image, occlusion: None });
    if severity == 0.0 {
        return plain(img.clone());
    }
    match kind {
        CorruptionKind::GaussianNoise => plain(gaussian_noise(img, 50.0 * severity, rng)),
        CorruptionKind::Occlusion => {
            let (image, rect) = occlude(img, severity, rng);
            Ok(Corrupted { image, occlusion: Some(rect) })
        }
        CorruptionKind::Resolution => {
            let f = 1 + (3.0 * severity).round() as usize;
            plain(if f == 1 { img.clone() } else { pixelate(img, f) })
        }
        CorruptionKind::Fog => plain(fog(img, severity, rng)),
        CorruptionKind::MotionBlur => {
            let len = 1 + (14.0 * severity).round() as usize;
            plain(if len == 1 { img.clone() } else { motion_blur(img, len) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn checker() -> Image {
        Image::from_fn(16, 12, |x, y| if (x + y) % 2 == 0 { [200, 40, 90] } else { [10, 220, 30] }).unwrap()
    }

    #[test]
    fn zero_severity_is_identity() {
        let img = checker();
        for kind in CorruptionKind::ALL {
            let out = corrupt(&img, kind, 0.0, &mut rng::stream(1, &[])).unwrap();
            assert_eq!(out.image, img, "{}", kind.name());
        }
    }

    #[test]
    fn occlusion_fill_contract() {
        let img = checker();
        let out = corrupt(&img, CorruptionKind::Occlusion, 0.8, &mut rng::stream(2, &[])).unwrap();
        let rect = out.occlusion.unwrap();
        assert!(rect.w * rect.h > 0);
        for y in 0..img.height() {
            for x in 0..img.width() {
                if rect.contains(x, y) {
                    assert_eq!(out.image.pixel(x, y), [128; 3]);
                } else {
                    assert_eq!(out.image.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }

    #[test]
    fn noise_std_tracks_severity() {
        let img = Image::filled(64, 64, [128; 3]).unwrap();
        for s in [0.2, 0.5] {
            let out = corrupt(&img, CorruptionKind::GaussianNoise, s, &mut rng::stream(3, &[])).unwrap();
            let diffs: Vec<f64> = out.image.pixels().iter().map(|&v| v as f64 - 128.0).collect();
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
            let target = 50.0 * s;
            assert!((var.sqrt() - target).abs() < 0.1 * target, "{} vs {target}", var.sqrt());
        }
    }

    #[test]
    fn blur_and_resolution_flatten_checkerboard() {
        let img = checker();
        let blurred = corrupt(&img, CorruptionKind::MotionBlur, 1.0, &mut rng::stream(0, &[])).unwrap().image;
        let spread = |im: &Image| {
            let row: Vec<u8> = (2..14).map(|x| im.pixel(x, 5)[0]).collect();
            row.iter().max().unwrap() - row.iter().min().unwrap()
        };
        assert!(spread(&blurred) < spread(&img));
        let pix = corrupt(&img, CorruptionKind::Resolution, 1.0, &mut rng::stream(0, &[])).unwrap().image;
        assert_eq!(pix.pixel(0, 0), pix.pixel(3, 3));
    }

    #[test]
    fn fog_brightens() {
        let img = Image::filled(20, 20, [0; 3]).unwrap();
        let out = corrupt(&img, CorruptionKind::Fog, 1.0, &mut rng::stream(9, &[])).unwrap().image;
        assert!(out.pixels().iter().any(|&v| v > 0));
        assert!(corrupt(&img, CorruptionKind::Fog, 1.5, &mut rng::stream(9, &[])).is_err());
    }
}
