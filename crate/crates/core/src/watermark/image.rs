//! Grayscale images and their file formats.
//!
//! * PGM `P5` (binary, maxval ≤ 65535) and `P2` (ASCII) for reading; `P5`
//!   8-bit for writing, with values clamped to `[0, 255]` and rounded.
//! * `AWMIMGF`: magic, height and width as `u32` LE, then row-major `f64` LE.
//!   Lossless for attacked images whose pixels leave `[0, 255]`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const FLOAT_MAGIC: &[u8; 7] = b"AWMIMGF";

/// `height × width` real-valued pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyImage);
        }
        crate::error::check_len(height * width, pixels.len())?;
        Ok(GrayImage {
            height,
            width,
            pixels,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        GrayImage::new(height, width, pixels)
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        GrayImage::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.width + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.pixels[r * self.width..(r + 1) * self.width]
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> GrayImage {
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self.pixels.iter().copied().map(f).collect(),
        }
    }

    /// Largest absolute pixel difference.
    pub fn max_abs_diff(&self, other: &GrayImage) -> Result<f64> {
        if (self.height, self.width) != (other.height, other.width) {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn format_err(format: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        format,
        reason: reason.into(),
    }
}

/// Whitespace-separated PGM header/ASCII tokens, skipping `#` comments.
struct Tokens<R> {
    inner: R,
}

impl<R: BufRead> Tokens<R> {
    fn next_token(&mut self) -> Result<String> {
        let mut token = Vec::new();
        loop {
            let mut byte = [0u8; 1];
            if self.inner.read(&mut byte)? == 0 {
                break;
            }
            match byte[0] {
                b'#' => {
                    let mut skipped = Vec::new();
                    self.inner.read_until(b'\n', &mut skipped)?;
                    if !token.is_empty() {
                        break;
                    }
                }
                b if b.is_ascii_whitespace() => {
                    if !token.is_empty() {
                        break;
                    }
                }
                b => token.push(b),
            }
        }
        if token.is_empty() {
            return Err(format_err("PGM", "unexpected end of data"));
        }
        String::from_utf8(token).map_err(|_| format_err("PGM", "non-ASCII token"))
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let token = self.next_token()?;
        token
            .parse()
            .map_err(|_| format_err("PGM", format!("bad {what}: {token:?}")))
    }
}

/// Reads a `P5` or `P2` grayscale PGM. Pixel values keep their integer scale
/// (they are not renormalized by maxval).
pub fn read_pgm<R: Read>(r: R) -> Result<GrayImage> {
    let mut tokens = Tokens {
        inner: BufReader::new(r),
    };
    let magic = tokens.next_token()?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(format_err("PGM", format!("unsupported magic {other:?}"))),
    };
    let width = tokens.next_usize("width")?;
    let height = tokens.next_usize("height")?;
    let maxval = tokens.next_usize("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format_err("PGM", format!("maxval {maxval} out of range")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| format_err("PGM", "image too large"))?;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte followed maxval and was consumed.
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let mut raw = vec![0u8; count * bytes_per];
        tokens
            .inner
            .read_exact(&mut raw)
            .map_err(|_| format_err("PGM", "truncated pixel data"))?;
        if bytes_per == 1 {
            pixels.extend(raw.iter().map(|&b| f64::from(b)));
        } else {
            pixels.extend(
                raw.chunks_exact(2)
                    .map(|b| f64::from(u16::from_be_bytes([b[0], b[1]]))),
            );
        }
    } else {
        for _ in 0..count {
            pixels.push(tokens.next_usize("pixel")? as f64);
        }
    }
    if pixels.iter().any(|&p| p > maxval as f64) {
        return Err(format_err("PGM", "pixel exceeds maxval"));
    }
    GrayImage::new(height, width, pixels)
}

/// Writes an 8-bit `P5` PGM; pixels are clamped to `[0, 255]` and rounded.
pub fn write_pgm<W: Write>(mut w: W, img: &GrayImage) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    let bytes: Vec<u8> = img
        .pixels
        .iter()
        .map(|&p| p.clamp(0.0, 255.0).round() as u8)
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn write_float_image<W: Write>(mut w: W, img: &GrayImage) -> Result<()> {
    w.write_all(FLOAT_MAGIC)?;
    w.write_all(&u32_field(img.height)?.to_le_bytes())?;
    w.write_all(&u32_field(img.width)?.to_le_bytes())?;
    let mut buf = Vec::with_capacity(img.len() * 8);
    for p in &img.pixels {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn u32_field(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| format_err("AWMIMGF", "dimension exceeds u32"))
}

pub fn read_float_image<R: Read>(mut r: R) -> Result<GrayImage> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)
        .map_err(|_| format_err("AWMIMGF", "truncated header"))?;
    if &magic != FLOAT_MAGIC {
        return Err(format_err("AWMIMGF", "bad magic"));
    }
    let mut dims = [0u8; 8];
    r.read_exact(&mut dims)
        .map_err(|_| format_err("AWMIMGF", "truncated header"))?;
    let height = u32::from_le_bytes(dims[0..4].try_into().expect("4 bytes")) as usize;
    let width = u32::from_le_bytes(dims[4..8].try_into().expect("4 bytes")) as usize;
    if height == 0 || width == 0 {
        return Err(Error::EmptyImage);
    }
    let count = height
        .checked_mul(width)
        .ok_or_else(|| format_err("AWMIMGF", "image too large"))?;
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)
        .map_err(|_| format_err("AWMIMGF", "truncated pixel data"))?;
    let pixels = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    GrayImage::new(height, width, pixels)
}

/// Image file kinds recognized by [`read_image`] / [`write_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Float,
}

impl ImageFormat {
    /// `.pgm` selects PGM; anything else the float format.
    pub fn from_path(path: &Path) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pgm") => ImageFormat::Pgm,
            _ => ImageFormat::Float,
        }
    }
}

/// Reads either format, chosen by the leading magic bytes.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(FLOAT_MAGIC) {
        read_float_image(bytes.as_slice())
    } else {
        read_pgm(bytes.as_slice())
    }
}

pub fn write_image(path: &Path, img: &GrayImage, format: ImageFormat) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        ImageFormat::Pgm => write_pgm(&mut buf, img)?,
        ImageFormat::Float => write_float_image(&mut buf, img)?,
    }
    std::fs::write(path, buf)?;
    Ok(())
}
