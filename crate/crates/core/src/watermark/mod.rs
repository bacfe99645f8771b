//! Image features and the two watermarking schemes built on them.
//!
//! Features are the signs of the first `K` AC coefficients of the full-frame
//! orthonormal DCT in zigzag order. Zero-watermarking stores the secret key
//! `η ∘ ξ`; associative watermarking stores Hebbian weights mapping the
//! feature `η` to the watermark `ξ`.

pub mod dct;
pub mod image;

pub use dct::{dct2d, dct2d_block, idct2d, zigzag, Coefficients, DctBasis};
pub use image::{
    read_float_image, read_image, read_pgm, write_float_image, write_image, write_pgm, GrayImage,
    ImageFormat,
};

use crate::error::{Error, Result};
use crate::memory::{awm_recall, DenseEngine, PatternStore, RecallEngine, RecallOptions, RecallTrace, Reference};
use crate::patterns::BipolarVector;

/// Selected DCT coefficients and their signs (`+1` iff the coefficient is
/// `≥ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    coefficients: Vec<f64>,
    signs: BipolarVector,
}

impl FeatureVector {
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        let signs = BipolarVector::from_reals(&coefficients)?;
        Ok(FeatureVector {
            coefficients,
            signs,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn signs(&self) -> &BipolarVector {
        &self.signs
    }

    pub fn into_signs(self) -> BipolarVector {
        self.signs
    }
}

/// First `k` AC coefficients in zigzag order.
pub fn extract_features(img: &GrayImage, k: usize) -> Result<FeatureVector> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let available = img.len() - 1;
    if k == 0 {
        return Err(Error::InvalidLength {
            what: "feature",
            len: 0,
        });
    }
    if k > available {
        return Err(Error::FeatureTooLong {
            requested: k,
            available,
        });
    }
    let order = zigzag(img.height(), img.width(), k + 1);
    let rows = order.iter().map(|p| p.0).max().unwrap_or(0) + 1;
    let cols = order.iter().map(|p| p.1).max().unwrap_or(0) + 1;
    let coef = dct2d_block(img, rows, cols)?;
    let floor = roundoff_floor(img);
    FeatureVector::from_coefficients(
        order[1..]
            .iter()
            .map(|&(r, c)| coef.get(r, c))
            .map(|v| if v.abs() <= floor { 0.0 } else { v })
            .collect(),
    )
}

/// Magnitude below which a coefficient is indistinguishable from rounding
/// error of the transform: `1e-12 ‖img‖₂`, with `‖coef‖₂ = ‖img‖₂`. Such
/// coefficients are reported as 0 (sign +1) so that, for example, a constant
/// image has no spurious negative AC signs.
fn roundoff_floor(img: &GrayImage) -> f64 {
    1e-12 * img.pixels().iter().map(|p| p * p).sum::<f64>().sqrt()
}

/// Zero-watermarking key `W = η ∘ ξ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey(pub BipolarVector);

impl SecretKey {
    pub fn bits(&self) -> &BipolarVector {
        &self.0
    }
}

fn zw_lengths(feature: usize, watermark: usize) -> Result<()> {
    if feature == watermark {
        Ok(())
    } else {
        Err(Error::ZeroWatermarkLength { feature, watermark })
    }
}

/// Key generation; zero-watermarking needs the feature and the watermark to
/// have the same length.
pub fn zw_map(feature: &BipolarVector, wm: &BipolarVector) -> Result<SecretKey> {
    zw_lengths(feature.len(), wm.len())?;
    Ok(SecretKey(feature.hadamard(wm)?))
}

/// Watermark extraction `ξ = W ∘ η`.
pub fn zw_extract(feature: &BipolarVector, key: &SecretKey) -> Result<BipolarVector> {
    zw_lengths(feature.len(), key.0.len())?;
    feature.hadamard(&key.0)
}

/// Pattern pairs (feature signs, watermark) for the associative layers.
pub fn awm_store(features: Vec<BipolarVector>, watermarks: Vec<BipolarVector>) -> Result<PatternStore> {
    if features.len() != watermarks.len() {
        return Err(Error::CountMismatch(format!(
            "{} features for {} watermarks",
            features.len(),
            watermarks.len()
        )));
    }
    PatternStore::new(features, watermarks)
}

/// Extracts `k`-bit features from every image and trains both layers.
pub fn awm_map_images(images: &[GrayImage], watermarks: &[BipolarVector], k: usize) -> Result<DenseEngine> {
    if images.len() != watermarks.len() {
        return Err(Error::CountMismatch(format!(
            "{} images for {} watermarks",
            images.len(),
            watermarks.len()
        )));
    }
    let features = images
        .iter()
        .map(|img| extract_features(img, k).map(FeatureVector::into_signs))
        .collect::<Result<Vec<_>>>()?;
    DenseEngine::train(&awm_store(features, watermarks.to_vec())?)
}

/// Feature extraction followed by associative recall. The returned watermark
/// is the state at `opts.t_max`.
pub fn awm_extract_image<E: RecallEngine + ?Sized>(
    img: &GrayImage,
    engine: &E,
    opts: RecallOptions,
    reference: Option<Reference<'_>>,
) -> Result<(BipolarVector, RecallTrace)> {
    let feature = extract_features(img, engine.key_len())?;
    let trace = awm_recall(engine, feature.signs(), opts, reference)?;
    Ok((trace.final_state.clone(), trace))
}

/// `⌈log2 p⌉`, 0 for `p ≤ 1`.
pub fn ceil_log2(p: u64) -> u32 {
    if p <= 1 {
        0
    } else {
        u64::BITS - (p - 1).leading_zeros()
    }
}

/// Zero-watermarking storage `P (K + 2⌈log2 P⌉)` bits: one key per image and
/// a pair of indices linking it to its image and owner.
pub fn info_cost_zero(p: u64, k: u64) -> Result<u128> {
    if p == 0 {
        return Err(Error::EmptyStore);
    }
    let per_image = u128::from(k) + 2 * u128::from(ceil_log2(p));
    u128::from(p).checked_mul(per_image).ok_or_else(cost_overflow)
}

fn cost_overflow() -> Error {
    Error::NumericFailure("information cost exceeds u128".into())
}

/// Associative-watermarking storage: `N K` hetero weights plus `N (N - 1) / 2`
/// distinct auto weights, each `⌈log2 P⌉` bits wide.
pub fn info_cost_awm(p: u64, k: u64, n: u64) -> Result<u128> {
    if p < 2 {
        return Err(Error::WidthUndefined {
            patterns: p as usize,
        });
    }
    if n < 2 {
        return Err(Error::InvalidLength {
            what: "watermark",
            len: n as usize,
        });
    }
    let width = u128::from(ceil_log2(p));
    let (n, k) = (u128::from(n), u128::from(k));
    let hetero = n.checked_mul(k).and_then(|v| v.checked_mul(width));
    let auto = (n * (n - 1) / 2).checked_mul(width);
    hetero
        .zip(auto)
        .and_then(|(h, a)| h.checked_add(a))
        .ok_or_else(cost_overflow)
}
