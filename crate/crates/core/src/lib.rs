//! Associative watermarking.
//!
//! * [`patterns`]: bipolar vectors, seeded generation, overlaps.
//! * [`memory`]: Hebbian hetero/auto-associative layers and composed recall.
//! * [`neurodynamics`]: macroscopic state equations of the recall.
//! * [`watermark`]: DCT features, zero-watermarking, image-level pipeline.
//! * [`attacks`]: JPEG-model and Gaussian-noise degradations.

pub mod attacks;
pub mod error;
pub mod memory;
pub mod neurodynamics;
pub mod patterns;
pub mod watermark;

pub use error::{Error, Result};
