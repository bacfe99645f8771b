//! Image degradations: a JPEG quantization model and additive Gaussian noise.
//!
//! The JPEG model pads the image to whole 8×8 blocks by edge replication,
//! level-shifts by −128, applies the orthonormal 8×8 DCT, quantizes with the
//! IJG luminance table scaled by quality, reconstructs, clamps to `[0, 255]`,
//! rounds, and crops back. Quality scaling: `s = 5000 / Q` for `Q < 50`,
//! `s = 200 − 2Q` otherwise; entries `(base · s + 50) / 100` in integer
//! arithmetic, clamped to `[1, 255]`.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::patterns::Seed;
use crate::watermark::{DctBasis, GrayImage};

/// IJG standard luminance quantization table, row-major.
pub const LUMINANCE_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Default stream for noise draws when the caller does not pick one.
pub const NOISE_STREAM: u64 = 0x4E01 << 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JpegParams {
    quality: u8,
}

impl JpegParams {
    pub fn new(quality: i64) -> Result<Self> {
        if (1..=100).contains(&quality) {
            Ok(JpegParams {
                quality: quality as u8,
            })
        } else {
            Err(Error::InvalidQuality(quality))
        }
    }

    pub fn quality(self) -> u8 {
        self.quality
    }

    /// Scaled quantization table.
    pub fn table(self) -> [u16; 64] {
        let q = u32::from(self.quality);
        let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
        LUMINANCE_TABLE.map(|base| ((u32::from(base) * scale + 50) / 100).clamp(1, 255) as u16)
    }
}

pub fn jpeg_attack(img: &GrayImage, params: JpegParams) -> Result<GrayImage> {
    let (h, w) = (img.height(), img.width());
    let (ph, pw) = (h.div_ceil(8) * 8, w.div_ceil(8) * 8);
    let padded: Vec<f64> = (0..ph)
        .flat_map(|r| (0..pw).map(move |c| (r.min(h - 1), c.min(w - 1))))
        .map(|(r, c)| img.get(r, c) - 128.0)
        .collect();
    let table = params.table();
    let basis = DctBasis::new(8);
    let mut out = vec![0.0; ph * pw];
    let mut block = [0.0; 64];
    let mut tmp = [0.0; 64];
    for br in (0..ph).step_by(8) {
        for bc in (0..pw).step_by(8) {
            for y in 0..8 {
                for v in 0..8 {
                    tmp[y * 8 + v] = (0..8)
                        .map(|x| basis.at(v, x) * padded[(br + y) * pw + bc + x])
                        .sum();
                }
            }
            for u in 0..8 {
                for v in 0..8 {
                    let coef: f64 = (0..8).map(|y| basis.at(u, y) * tmp[y * 8 + v]).sum();
                    let q = f64::from(table[u * 8 + v]);
                    block[u * 8 + v] = (coef / q).round() * q;
                }
            }
            for y in 0..8 {
                for v in 0..8 {
                    tmp[y * 8 + v] = (0..8).map(|u| basis.at(u, y) * block[u * 8 + v]).sum();
                }
            }
            for y in 0..8 {
                for x in 0..8 {
                    let value: f64 = (0..8).map(|v| basis.at(v, x) * tmp[y * 8 + v]).sum();
                    out[(br + y) * pw + bc + x] = (value + 128.0).clamp(0.0, 255.0).round();
                }
            }
        }
    }
    GrayImage::from_fn(h, w, |r, c| out[r * pw + c])
}

/// Additive i.i.d. normal noise. Draws are taken in row-major pixel order
/// from `seed.rng(stream)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub mean: f64,
    pub std: f64,
    pub seed: Seed,
    pub stream: u64,
    /// Clamp the result to `[0, 255]`; off by default so that pixels may
    /// leave the nominal range.
    pub clamp: bool,
}

impl NoiseParams {
    pub fn new(mean: f64, std: f64, seed: Seed) -> Result<Self> {
        let params = NoiseParams {
            mean,
            std,
            seed,
            stream: NOISE_STREAM,
            clamp: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_stream(self, stream: u64) -> Self {
        NoiseParams { stream, ..self }
    }

    pub fn with_clamp(self, clamp: bool) -> Self {
        NoiseParams { clamp, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::OutOfDomain {
                what: "noise mean",
                value: self.mean,
            });
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            return Err(Error::OutOfDomain {
                what: "noise std",
                value: self.std,
            });
        }
        Ok(())
    }
}

pub fn gaussian_attack(img: &GrayImage, params: &NoiseParams) -> Result<GrayImage> {
    params.validate()?;
    let normal = Normal::new(params.mean, params.std)
        .map_err(|e| Error::NumericFailure(format!("normal distribution: {e}")))?;
    let mut rng = params.seed.rng(params.stream);
    let noisy = img.map(|p| p + normal.sample(&mut rng));
    Ok(if params.clamp {
        noisy.map(|p| p.clamp(0.0, 255.0))
    } else {
        noisy
    })
}
