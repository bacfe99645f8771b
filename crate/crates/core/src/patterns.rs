//! Bipolar (±1) patterns, seeded generation and overlap arithmetic.
//!
//! A [`BipolarVector`] is stored bit-packed, one sign bit per element
//! (bit set ↔ +1), least-significant bit first inside each `u64` word.
//! Padding bits past `len` are always zero, so word-level XOR/popcount
//! gives exact mismatch counts.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`): the 64-bit
//! [`Seed`] is expanded with `seed_from_u64` and the stream index selects
//! the ChaCha stream, so `(seed, stream)` pairs address independent,
//! platform-stable sequences.

use std::io::{Read, Write};

use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{check_len, Error, Result};

const WORD_BITS: usize = 64;

/// Experiment seed. Identical seeds reproduce identical pattern streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for one independent stream under this seed.
    pub fn rng(self, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Normalized inner product of two bipolar vectors, in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Overlap(f64);

impl Overlap {
    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Overlap(value))
        } else {
            Err(Error::OutOfDomain {
                what: "overlap",
                value,
            })
        }
    }

    /// Overlap of two length-`n` vectors that disagree in `mismatches` places.
    pub fn from_counts(n: usize, mismatches: usize) -> Self {
        debug_assert!(n > 0 && mismatches <= n);
        Overlap((n as f64 - 2.0 * mismatches as f64) / n as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Bit error rate `(1 - m) / 2`.
    pub fn ber(self) -> f64 {
        (1.0 - self.0) / 2.0
    }
}

/// `(1 - m) / 2`; errors when `m` lies outside [-1, 1].
pub fn ber_from_overlap(m: f64) -> Result<f64> {
    Overlap::new(m).map(Overlap::ber)
}

/// Fixed-length vector of ±1 values, bit-packed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BipolarVector {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BipolarVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let shown: String = (0..self.len.min(64))
            .map(|i| if self.is_positive(i) { '+' } else { '-' })
            .collect();
        let ellipsis = if self.len > 64 { "…" } else { "" };
        write!(f, "BipolarVector[{}]({shown}{ellipsis})", self.len)
    }
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BipolarVector {
    fn check_nonempty(len: usize) -> Result<()> {
        if len == 0 {
            Err(Error::InvalidLength {
                what: "bipolar vector",
                len,
            })
        } else {
            Ok(())
        }
    }

    /// All-(+1) vector.
    pub fn ones(len: usize) -> Result<Self> {
        Self::from_fn(len, |_| true)
    }

    /// Builds a vector where `positive(i)` decides whether element `i` is +1.
    pub fn from_fn(len: usize, mut positive: impl FnMut(usize) -> bool) -> Result<Self> {
        Self::check_nonempty(len)?;
        let mut words = vec![0u64; words_for(len)];
        for i in 0..len {
            if positive(i) {
                words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(BipolarVector { len, words })
    }

    /// From explicit signs; every entry must be exactly +1 or -1.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::OutOfDomain {
                what: "bipolar element",
                value: bad as f64,
            });
        }
        Self::from_fn(signs.len(), |i| signs[i] == 1)
    }

    /// Sign convention of the binarization step: `x >= 0` maps to +1.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Self::from_fn(values.len(), |i| values[i] >= 0.0)
    }

    /// Reconstructs a vector from packed words, clearing padding bits.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self> {
        Self::check_nonempty(len)?;
        check_len(words_for(len), words.len())?;
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(BipolarVector { len, words })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; zero-length vectors cannot be constructed.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_positive(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Element `i` as +1 or -1.
    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        if self.is_positive(i) {
            1
        } else {
            -1
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_signs(&self) -> Vec<i8> {
        self.iter().collect()
    }

    /// Number of positions where the two vectors disagree.
    pub fn mismatches(&self, other: &BipolarVector) -> Result<usize> {
        check_len(self.len, other.len)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Integer inner product Σ a_i b_i.
    pub fn dot(&self, other: &BipolarVector) -> Result<i64> {
        let mism = self.mismatches(other)? as i64;
        Ok(self.len as i64 - 2 * mism)
    }

    /// `(1/n) Σ a_i b_i`.
    pub fn overlap(&self, other: &BipolarVector) -> Result<Overlap> {
        Ok(Overlap::from_counts(self.len, self.mismatches(other)?))
    }

    /// Fraction of disagreeing positions, `mismatches / len`, as a single
    /// correctly rounded division.
    pub fn bit_error_rate(&self, other: &BipolarVector) -> Result<f64> {
        Ok(self.mismatches(other)? as f64 / self.len as f64)
    }

    pub fn negated(&self) -> BipolarVector {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.len);
        }
        BipolarVector {
            len: self.len,
            words,
        }
    }

    /// Elementwise product (XNOR on the sign bits).
    pub fn hadamard(&self, other: &BipolarVector) -> Result<BipolarVector> {
        check_len(self.len, other.len)?;
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| !(a ^ b))
            .collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.len);
        }
        Ok(BipolarVector {
            len: self.len,
            words,
        })
    }

    /// Copy with the listed positions negated.
    pub fn with_flips(&self, positions: impl IntoIterator<Item = usize>) -> BipolarVector {
        let mut out = self.clone();
        for i in positions {
            assert!(i < self.len);
            out.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
        }
        out
    }
}

/// Overlap of two vectors; see [`BipolarVector::overlap`].
pub fn overlap(a: &BipolarVector, b: &BipolarVector) -> Result<Overlap> {
    a.overlap(b)
}

/// Fair ±1 vector drawn from any generator.
pub fn random_bipolar_with<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<BipolarVector> {
    BipolarVector::check_nonempty(n)?;
    let words = (0..words_for(n)).map(|_| rng.next_u64()).collect();
    BipolarVector::from_words(n, words)
}

/// Each element independently ±1 with probability 1/2, deterministic in
/// `(n, seed, stream)`.
pub fn random_bipolar(n: usize, seed: Seed, stream: u64) -> Result<BipolarVector> {
    random_bipolar_with(n, &mut seed.rng(stream))
}

/// Result of [`degrade_to_overlap`].
#[derive(Debug, Clone)]
pub struct Degraded {
    pub vector: BipolarVector,
    pub flips: usize,
    /// Quantized overlap `1 - 2f/n` actually achieved.
    pub achieved: Overlap,
}

/// Flip count for a target overlap: `round(n (1 - m) / 2)`, ties to even.
pub fn flip_count(n: usize, target: f64) -> Result<usize> {
    Overlap::new(target)?;
    let f = (n as f64 * (1.0 - target) / 2.0).round_ties_even();
    Ok((f as usize).min(n))
}

pub fn degrade_to_overlap_with<R: RngCore + ?Sized>(
    v: &BipolarVector,
    target: f64,
    rng: &mut R,
) -> Result<Degraded> {
    let flips = flip_count(v.len(), target)?;
    let chosen = index::sample(rng, v.len(), flips);
    let vector = v.with_flips(chosen.iter());
    Ok(Degraded {
        vector,
        flips,
        achieved: Overlap::from_counts(v.len(), flips),
    })
}

/// Flips exactly `round(n (1 - target) / 2)` uniformly chosen positions of `v`.
pub fn degrade_to_overlap(
    v: &BipolarVector,
    target: f64,
    seed: Seed,
    stream: u64,
) -> Result<Degraded> {
    degrade_to_overlap_with(v, target, &mut seed.rng(stream))
}

const PATTERN_MAGIC: &[u8; 7] = b"AWMPAT1";

/// Writes a pattern set: `AWMPAT1`, n (u32 LE), count (u32 LE), then each
/// row bit-packed into `ceil(n/8)` bytes, element `i` at bit `i % 8` of byte
/// `i / 8`, bit set ↔ +1.
pub fn write_patterns<W: Write>(mut w: W, patterns: &[BipolarVector]) -> Result<()> {
    let n = patterns.first().map_or(0, BipolarVector::len);
    for p in patterns {
        check_len(n, p.len())?;
    }
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidLength {
        what: "pattern row",
        len: n,
    })?;
    let count = u32::try_from(patterns.len()).map_err(|_| Error::InvalidLength {
        what: "pattern set",
        len: patterns.len(),
    })?;
    w.write_all(PATTERN_MAGIC)?;
    w.write_all(&n32.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())?;
    let row_bytes = n.div_ceil(8);
    let mut buf = Vec::with_capacity(row_bytes);
    for p in patterns {
        buf.clear();
        for word in p.words() {
            buf.extend_from_slice(&word.to_le_bytes());
        }
        buf.truncate(row_bytes);
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_patterns<R: Read>(mut r: R) -> Result<Vec<BipolarVector>> {
    let bad = |reason: &str| Error::Format {
        format: "AWMPAT1",
        reason: reason.to_string(),
    };
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != PATTERN_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    if n == 0 && count > 0 {
        return Err(bad("zero-length rows"));
    }
    let row_bytes = n.div_ceil(8);
    let mut row = vec![0u8; row_bytes];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut row)?;
        let words = row
            .chunks(8)
            .map(|chunk| {
                let mut b = [0u8; 8];
                b[..chunk.len()].copy_from_slice(chunk);
                u64::from_le_bytes(b)
            })
            .collect();
        out.push(BipolarVector::from_words(n, words)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(signs: &[i8]) -> BipolarVector {
        BipolarVector::from_signs(signs).unwrap()
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_bipolar(8, Seed(1), 0).unwrap();
        let b = random_bipolar(8, Seed(1), 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_length_is_rejected() {
        assert!(matches!(
            random_bipolar(0, Seed(1), 0),
            Err(Error::InvalidLength { .. })
        ));
    }

    #[test]
    fn random_mean_concentrates() {
        // 6 sigma of the mean of 1e5 fair signs is 6/sqrt(1e5) ≈ 0.019.
        let n = 100_000;
        let x = random_bipolar(n, Seed(1), 0).unwrap();
        let mean = x.iter().map(i64::from).sum::<i64>() as f64 / n as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn streams_differ() {
        // Per-pair collision probability is 2^-8; 100 pairs must all differ
        // for these fixed seeds.
        let equal = (0..100u64)
            .filter(|&s| {
                random_bipolar(8, Seed(1), 2 * s).unwrap()
                    == random_bipolar(8, Seed(1), 2 * s + 1).unwrap()
            })
            .count();
        assert_eq!(equal, 0);
    }

    #[test]
    fn overlap_examples() {
        let a = random_bipolar(37, Seed(3), 0).unwrap();
        assert_eq!(a.overlap(&a).unwrap().value(), 1.0);
        assert_eq!(a.overlap(&a.negated()).unwrap().value(), -1.0);
        let p = v(&[1, 1, 1, 1]);
        let q = v(&[1, 1, -1, -1]);
        assert_eq!(p.overlap(&q).unwrap().value(), 0.0);
        assert!(matches!(
            p.overlap(&v(&[1, 1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degrade_examples() {
        let x = random_bipolar(10, Seed(9), 0).unwrap();
        let same = degrade_to_overlap(&x, 1.0, Seed(1), 0).unwrap();
        assert_eq!(same.vector, x);
        assert_eq!(same.flips, 0);

        for s in 0..20 {
            let d = degrade_to_overlap(&x, 0.2, Seed(s), 0).unwrap();
            assert_eq!(d.flips, 4);
            assert_eq!(x.mismatches(&d.vector).unwrap(), 4);
            assert!((d.achieved.value() - 0.2).abs() < 1e-15);
        }

        let neg = degrade_to_overlap(&x, -1.0, Seed(1), 0).unwrap();
        assert_eq!(neg.vector, x.negated());

        assert!(matches!(
            degrade_to_overlap(&x, 1.5, Seed(1), 0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn flip_count_rounds_half_to_even() {
        // n = 10, m = 0.9 -> 0.5 flips -> 0; m = 0.7 -> 1.5 -> 2.
        assert_eq!(flip_count(10, 0.9).unwrap(), 0);
        assert_eq!(flip_count(10, 0.7).unwrap(), 2);
    }

    #[test]
    fn ber_examples() {
        assert_eq!(ber_from_overlap(1.0).unwrap(), 0.0);
        assert_eq!(ber_from_overlap(0.0).unwrap(), 0.5);
        assert_eq!(ber_from_overlap(-1.0).unwrap(), 1.0);
        assert!(ber_from_overlap(1.01).is_err());
    }

    #[test]
    fn random_pair_overlap_statistics() {
        // E[m] = 0 and Var[m] = 1/n over 1e4 pairs at n = 1024.
        let n = 1024;
        let pairs = 10_000;
        let mut rng = Seed(42).rng(0);
        let ms: Vec<f64> = (0..pairs)
            .map(|_| {
                let a = random_bipolar_with(n, &mut rng).unwrap();
                let b = random_bipolar_with(n, &mut rng).unwrap();
                a.overlap(&b).unwrap().value()
            })
            .collect();
        let mean = ms.iter().sum::<f64>() / pairs as f64;
        let var = ms.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (pairs - 1) as f64;
        let se_mean = (1.0 / n as f64 / pairs as f64).sqrt();
        // Var of the sample variance for a near-normal variable: 2 s^4 / (k-1).
        let se_var = (2.0 / (pairs as f64 - 1.0)).sqrt() / n as f64;
        assert!(mean.abs() < 5.0 * se_mean, "mean {mean}");
        assert!((var - 1.0 / n as f64).abs() < 5.0 * se_var, "var {var}");
    }

    #[test]
    fn pattern_file_layout() {
        let a = v(&[1, -1, -1, 1, 1, 1, 1, 1, -1]);
        let mut buf = Vec::new();
        write_patterns(&mut buf, std::slice::from_ref(&a)).unwrap();
        assert_eq!(&buf[..7], b"AWMPAT1");
        assert_eq!(&buf[7..11], &9u32.to_le_bytes());
        assert_eq!(&buf[11..15], &1u32.to_le_bytes());
        assert_eq!(&buf[15..], &[0b1111_1001, 0b0000_0000]);
        assert_eq!(read_patterns(&buf[..]).unwrap(), vec![a]);
        assert!(read_patterns(&b"AWMPAT2\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    fn signs_strategy() -> impl Strategy<Value = Vec<i8>> {
        prop::collection::vec(prop::bool::ANY, 1..300)
            .prop_map(|bits| bits.into_iter().map(|b| if b { 1 } else { -1 }).collect())
    }

    proptest! {
        #[test]
        fn packed_ops_match_sign_semantics(a in signs_strategy(), seed in any::<u64>()) {
            let n = a.len();
            let b = random_bipolar(n, Seed(seed), 0).unwrap().to_signs();
            let (pa, pb) = (v(&a), v(&b));
            let dot: i64 = a.iter().zip(&b).map(|(x, y)| i64::from(x * y)).sum();
            prop_assert_eq!(pa.dot(&pb).unwrap(), dot);
            prop_assert_eq!(pa.overlap(&pb).unwrap(), pb.overlap(&pa).unwrap());
            let had: Vec<i8> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            prop_assert_eq!(pa.hadamard(&pb).unwrap().to_signs(), had);
            let neg: Vec<i8> = a.iter().map(|x| -x).collect();
            prop_assert_eq!(pa.negated().to_signs(), neg);
        }

        #[test]
        fn degraded_ber_matches_quantized_overlap(n in 1usize..500, m in -1.0f64..=1.0, seed in any::<u64>()) {
            let x = random_bipolar(n, Seed(seed), 0).unwrap();
            let d = degrade_to_overlap(&x, m, Seed(seed), 1).unwrap();
            let achieved = 1.0 - 2.0 * d.flips as f64 / n as f64;
            let ber = ber_from_overlap(x.overlap(&d.vector).unwrap().value()).unwrap();
            prop_assert!((ber - (1.0 - achieved) / 2.0).abs() < 1e-15);
            prop_assert!((achieved - m).abs() <= 1.0 / n as f64 + 1e-12);
        }

        #[test]
        fn pattern_file_roundtrip(n in 1usize..200, count in 0usize..5, seed in any::<u64>()) {
            let rows: Vec<_> = (0..count as u64).map(|s| random_bipolar(n, Seed(seed), s).unwrap()).collect();
            let mut buf = Vec::new();
            write_patterns(&mut buf, &rows).unwrap();
            let back = read_patterns(&buf[..]).unwrap();
            prop_assert_eq!(back, rows);
        }
    }
}
