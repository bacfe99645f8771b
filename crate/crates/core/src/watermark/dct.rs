//! Orthonormal type-II DCT, separable in two dimensions.

use std::f64::consts::PI;

use super::image::GrayImage;
use crate::error::{Error, Result};

/// Row-major `rows × cols` coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Coefficients {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyImage);
        }
        crate::error::check_len(rows * cols, data.len())?;
        Ok(Coefficients { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Coefficients::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// `n × n` orthonormal DCT-II matrix, `B[k][x] = c_k cos(π (2x + 1) k / 2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis {
    n: usize,
    data: Vec<f64>,
}

impl DctBasis {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for x in 0..n {
                data.push(scale * (PI * (2 * x + 1) as f64 * k as f64 / (2.0 * nf)).cos());
            }
        }
        DctBasis { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn at(&self, k: usize, x: usize) -> f64 {
        self.data[k * self.n + x]
    }
}

/// Coefficients `(u, v)` for `u < rows`, `v < cols` of the 2-D transform.
/// The full transform is the case `rows = H`, `cols = W`; smaller blocks are
/// bitwise equal to the corresponding corner of it.
pub fn dct2d_block(img: &GrayImage, rows: usize, cols: usize) -> Result<Coefficients> {
    let (h, w) = (img.height(), img.width());
    if rows == 0 || cols == 0 || rows > h || cols > w {
        return Err(Error::InvalidLength {
            what: "DCT block",
            len: rows.max(cols),
        });
    }
    let bh = DctBasis::new(h);
    let bw = DctBasis::new(w);
    // Rows first: tmp[y][v] = Σ_x B_w[v][x] img[y][x].
    let mut tmp = vec![0.0; h * cols];
    for y in 0..h {
        let row = img.row(y);
        for v in 0..cols {
            tmp[y * cols + v] = row.iter().enumerate().map(|(x, &p)| bw.at(v, x) * p).sum();
        }
    }
    let mut out = vec![0.0; rows * cols];
    for u in 0..rows {
        for v in 0..cols {
            out[u * cols + v] = (0..h).map(|y| bh.at(u, y) * tmp[y * cols + v]).sum();
        }
    }
    Coefficients::new(rows, cols, out)
}

/// Full orthonormal 2-D DCT-II.
pub fn dct2d(img: &GrayImage) -> Result<Coefficients> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    dct2d_block(img, img.height(), img.width())
}

/// Inverse of [`dct2d`].
pub fn idct2d(coef: &Coefficients) -> Result<GrayImage> {
    let (h, w) = (coef.rows(), coef.cols());
    let bh = DctBasis::new(h);
    let bw = DctBasis::new(w);
    let mut tmp = vec![0.0; h * w];
    for y in 0..h {
        for v in 0..w {
            tmp[y * w + v] = (0..h).map(|u| bh.at(u, y) * coef.get(u, v)).sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (0..w).map(|v| bw.at(v, x) * tmp[y * w + v]).sum();
        }
    }
    GrayImage::new(h, w, out)
}

/// The first `count` positions of the JPEG zigzag scan over an `h × w`
/// grid: diagonal `s = r + c` in increasing order, even diagonals walked
/// with `r` decreasing, odd diagonals with `r` increasing.
pub fn zigzag(h: usize, w: usize, count: usize) -> Vec<(usize, usize)> {
    let count = count.min(h * w);
    let mut out = Vec::with_capacity(count);
    let mut s: usize = 0;
    while out.len() < count {
        let lo = s.saturating_sub(w - 1);
        let hi = s.min(h - 1);
        if lo <= hi {
            if s.is_multiple_of(2) {
                out.extend((lo..=hi).rev().map(|r| (r, s - r)));
            } else {
                out.extend((lo..=hi).map(|r| (r, s - r)));
            }
        }
        s += 1;
    }
    out.truncate(count);
    out
}
