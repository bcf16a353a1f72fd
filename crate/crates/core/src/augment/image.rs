use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_bytes, write_file};

pub const IMAGE_MAGIC: &[u8; 4] = b"IMG1";

/// 8-bit RGB raster, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::out_of_range("image size", format!("{width}x{height} has zero area")));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::DimensionMismatch { expected: width * height * 3, got: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, rgb.repeat(width * height))
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Same dimensions, new pixel buffer.
    pub(crate) fn with_pixels(&self, pixels: Vec<u8>) -> Self {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Self { width: self.width, height: self.height, pixels }
    }
}

pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

fn ppm_error(reason: impl Into<String>) -> Error {
    Error::Malformed { line: 0, reason: format!("PPM: {}", reason.into()) }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(Error::BadMagic { expected: "P6", found: bytes[..bytes.len().min(2)].to_vec() });
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(ppm_error("header ends early")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let digits = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *field = digits.parse().map_err(|_| ppm_error("expected a decimal header field"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ppm_error("missing whitespace after maxval"));
    }
    pos += 1;
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(ppm_error(format!("maxval {maxval} unsupported, only 255")));
    }
    let payload = &bytes[pos..];
    let expected = w as u64 * h as u64 * 3;
    if payload.len() as u64 != expected {
        return Err(Error::Truncated { expected, found: payload.len() as u64 });
    }
    Image::new(w, h, payload.to_vec())
}

pub fn encode_img1(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + img.pixels.len());
    out.extend_from_slice(IMAGE_MAGIC);
    out.extend_from_slice(&(img.width as u32).to_le_bytes());
    out.extend_from_slice(&(img.height as u32).to_le_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn decode_img1(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 12 || &bytes[..4] != IMAGE_MAGIC {
        return Err(Error::BadMagic { expected: "IMG1", found: bytes[..bytes.len().min(4)].to_vec() });
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = w as u64 * h as u64 * 3;
    let found = (bytes.len() - 12) as u64;
    if found != expected {
        return Err(Error::Truncated { expected, found });
    }
    Image::new(w, h, bytes[12..].to_vec())
}

/// Read a PPM or IMG1 file, chosen by its magic bytes.
pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(IMAGE_MAGIC) {
        decode_img1(&bytes)
    } else {
        decode_ppm(&bytes)
    }
}

pub fn write_ppm(path: &Path, img: &Image) -> Result<()> {
    write_file(path, &encode_ppm(img))
}

pub fn write_img1(path: &Path, img: &Image) -> Result<()> {
    write_file(path, &encode_img1(img))
}
