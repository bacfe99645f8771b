//! Image corpora: a directory of PGM / float images, or a synthetic set of
//! natural-looking grayscale images.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use awm_core::patterns::Seed;
use awm_core::watermark::image::read_image;
use awm_core::watermark::GrayImage;
use rand::Rng;

use crate::streams::{stream, CORPUS};
use crate::HarnessError;

/// Named image, named by file stem or synthetic index.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusImage {
    pub name: String,
    pub image: GrayImage,
}

/// Loads every regular file in `dir`, sorted by file name. Files that fail
/// to parse are an error.
pub fn load_dir(dir: &Path) -> Result<Vec<CorpusImage>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::Corpus(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(HarnessError::Corpus(format!("{}: no images", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let image = read_image(p)
                .map_err(|e| HarnessError::Corpus(format!("{}: {e}", p.display())))?;
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(CorpusImage { name, image })
        })
        .collect()
}

/// `count` synthetic images of size `h × w`.
pub fn synthetic(count: usize, h: usize, w: usize, seed: Seed) -> Result<Vec<CorpusImage>, HarnessError> {
    (0..count)
        .map(|i| {
            Ok(CorpusImage {
                name: format!("synthetic{i:03}"),
                image: synthetic_image(h, w, seed, i)?,
            })
        })
        .collect()
}

/// Integer-valued image in [0, 255]: a 1/f-like sum of oriented waves, a few
/// smooth blobs and straight edges, plus mild texture.
pub fn synthetic_image(h: usize, w: usize, seed: Seed, index: usize) -> Result<GrayImage, HarnessError> {
    let mut rng = seed.rng(stream(CORPUS, index, 0));
    let base = rng.random_range(70.0..180.0);
    let waves: Vec<[f64; 4]> = (0..24)
        .map(|_| {
            let f: f64 = rng.random_range(0.5f64..24.0);
            let theta = rng.random_range(0.0..PI);
            [
                f * theta.cos(),
                f * theta.sin(),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(20.0..70.0) / f.sqrt(),
            ]
        })
        .collect();
    let blobs: Vec<[f64; 4]> = (0..6)
        .map(|_| {
            [
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.03..0.25),
                rng.random_range(-60.0..60.0),
            ]
        })
        .collect();
    let edges: Vec<[f64; 3]> = (0..4)
        .map(|_| {
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            [theta, rng.random_range(-0.4..0.4), rng.random_range(-45.0..45.0)]
        })
        .collect();
    let texture: Vec<f64> = (0..h * w).map(|_| rng.random_range(-3.0..3.0)).collect();
    let img = GrayImage::from_fn(h, w, |r, c| {
        let y = r as f64 / h.max(1) as f64;
        let x = c as f64 / w.max(1) as f64;
        let mut v = base;
        for &[fy, fx, ph, amp] in &waves {
            v += amp * (2.0 * PI * (fy * y + fx * x) + ph).cos();
        }
        for &[cy, cx, rad, amp] in &blobs {
            let d2 = (y - cy).powi(2) + (x - cx).powi(2);
            v += amp * (-d2 / (2.0 * rad * rad)).exp();
        }
        for &[theta, off, step] in &edges {
            if (x - 0.5) * theta.cos() + (y - 0.5) * theta.sin() > off {
                v += step;
            }
        }
        (v + texture[r * w + c]).round().clamp(0.0, 255.0)
    })?;
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_images_are_reproducible_and_distinct() {
        let a = synthetic_image(32, 40, Seed(3), 0).unwrap();
        let b = synthetic_image(32, 40, Seed(3), 0).unwrap();
        let c = synthetic_image(32, 40, Seed(3), 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!((a.height(), a.width()), (32, 40));
        assert!(a
            .pixels()
            .iter()
            .all(|&p| (0.0..=255.0).contains(&p) && p == p.round()));
        let mean = a.pixels().iter().sum::<f64>() / a.len() as f64;
        let var = a.pixels().iter().map(|p| (p - mean).powi(2)).sum::<f64>() / a.len() as f64;
        assert!(var > 100.0, "flat image: var {var}");
    }

    #[test]
    fn directory_loading_is_sorted() {
        let dir = tempfile::tempdir().unwrap();
        for (name, v) in [("b.pgm", 2.0), ("a.pgm", 1.0)] {
            let img = GrayImage::constant(4, 4, v).unwrap();
            awm_core::watermark::image::write_image(
                &dir.path().join(name),
                &img,
                awm_core::watermark::image::ImageFormat::Pgm,
            )
            .unwrap();
        }
        let images = load_dir(dir.path()).unwrap();
        assert_eq!(images.len(), 2);
        assert_eq!(images[0].name, "a");
        assert_eq!(images[0].image.get(0, 0), 1.0);
        std::fs::write(dir.path().join("c.txt"), "junk").unwrap();
        assert!(load_dir(dir.path()).is_err());
        assert!(load_dir(&dir.path().join("missing")).is_err());
    }
}
