//! Hebbian hetero-associative and auto-associative layers and the composed
//! associative watermarking recall.
//!
//! Weights are kept as unscaled integer Hebbian sums (the 1/N factor does
//! not change any sign decision), stored as `i16`, with `i64` accumulators
//! for the local fields. Two evaluation engines compute identical outputs:
//!
//! * [`DenseEngine`] reads the trained weight matrices, O(NK) / O(N²) per step;
//! * the pattern-space engine ([`PatternStore`] itself) refactors the field as
//!   `h_i = Σ_μ ξ_i^μ (η^μ · y)`, O(P(K + N)) per step. For the auto layer the
//!   excluded self-coupling is removed exactly by subtracting `P x_i`.
//!
//! `sgn(0) = +1` throughout.

use std::io::{Read, Write};

use rand::RngCore;

use crate::error::{check_len, Error, Result};
use crate::patterns::{random_bipolar_with, BipolarVector, Overlap};

/// Index-aligned key (length K) and associative (length N) patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternStore {
    keys: Vec<BipolarVector>,
    associates: Vec<BipolarVector>,
}

impl PatternStore {
    pub fn new(keys: Vec<BipolarVector>, associates: Vec<BipolarVector>) -> Result<Self> {
        if keys.len() != associates.len() {
            return Err(Error::CountMismatch(format!(
                "{} keys vs {} associative patterns",
                keys.len(),
                associates.len()
            )));
        }
        let (Some(k0), Some(a0)) = (keys.first(), associates.first()) else {
            return Err(Error::EmptyStore);
        };
        let (k, n) = (k0.len(), a0.len());
        for key in &keys {
            check_len(k, key.len())?;
        }
        for a in &associates {
            check_len(n, a.len())?;
        }
        Ok(PatternStore { keys, associates })
    }

    /// `p` independent fair random pairs. Keys are drawn before associates,
    /// pair by pair, from the one generator.
    pub fn random<R: RngCore + ?Sized>(p: usize, k: usize, n: usize, rng: &mut R) -> Result<Self> {
        let mut keys = Vec::with_capacity(p);
        let mut associates = Vec::with_capacity(p);
        for _ in 0..p {
            keys.push(random_bipolar_with(k, rng)?);
            associates.push(random_bipolar_with(n, rng)?);
        }
        Self::new(keys, associates)
    }

    /// Number of stored pairs P.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key_len(&self) -> usize {
        self.keys[0].len()
    }

    pub fn assoc_len(&self) -> usize {
        self.associates[0].len()
    }

    pub fn keys(&self) -> &[BipolarVector] {
        &self.keys
    }

    pub fn associates(&self) -> &[BipolarVector] {
        &self.associates
    }

    pub fn reference(&self, mu: usize) -> Reference<'_> {
        Reference {
            key: &self.keys[mu],
            associate: &self.associates[mu],
        }
    }
}

/// Transposed bit planes: row `i` holds bit μ = sign of pattern μ at index `i`.
fn bit_planes(patterns: &[BipolarVector]) -> Vec<Vec<u64>> {
    let len = patterns[0].len();
    let words = patterns.len().div_ceil(64);
    let mut planes = vec![vec![0u64; words]; len];
    for (mu, p) in patterns.iter().enumerate() {
        for (i, plane) in planes.iter_mut().enumerate() {
            if p.is_positive(i) {
                plane[mu / 64] |= 1 << (mu % 64);
            }
        }
    }
    planes
}

fn hebbian_entry(p: usize, a: &[u64], b: &[u64]) -> i16 {
    let mism: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
    (p as i32 - 2 * mism as i32) as i16
}

fn check_weight_range(p: usize) -> Result<()> {
    if p > i16::MAX as usize {
        Err(Error::WeightOverflow { patterns: p })
    } else {
        Ok(())
    }
}

/// Row-major integer matrix shared by both weight types.
#[derive(Debug, Clone, PartialEq, Eq)]
struct IntMatrix {
    rows: usize,
    cols: usize,
    patterns: usize,
    data: Vec<i16>,
}

impl IntMatrix {
    fn row(&self, i: usize) -> &[i16] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn max_abs(&self) -> i16 {
        self.data.iter().map(|w| w.saturating_abs()).max().unwrap_or(0)
    }
}

const WEIGHT_MAGIC: &[u8; 5] = b"AWMW1";
const WEIGHT_WIDTH_BYTES: u8 = 2;

fn write_matrix<W: Write>(mut w: W, m: &IntMatrix, symmetric: bool) -> Result<()> {
    let as_u32 = |v: usize, what| {
        u32::try_from(v).map_err(|_| Error::InvalidLength { what, len: v })
    };
    w.write_all(WEIGHT_MAGIC)?;
    w.write_all(&as_u32(m.rows, "weight rows")?.to_le_bytes())?;
    w.write_all(&as_u32(m.cols, "weight cols")?.to_le_bytes())?;
    w.write_all(&[u8::from(symmetric), WEIGHT_WIDTH_BYTES])?;
    w.write_all(&as_u32(m.patterns, "pattern count")?.to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.data.len() * 2);
    for v in &m.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_matrix<R: Read>(mut r: R) -> Result<(IntMatrix, bool)> {
    let bad = |reason: String| Error::Format {
        format: "AWMW1",
        reason,
    };
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != WEIGHT_MAGIC {
        return Err(bad("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let rows = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let cols = u32::from_le_bytes(b4) as usize;
    let mut flags = [0u8; 2];
    r.read_exact(&mut flags)?;
    let symmetric = match flags[0] {
        0 => false,
        1 => true,
        other => return Err(bad(format!("symmetric flag {other}"))),
    };
    if flags[1] != WEIGHT_WIDTH_BYTES {
        return Err(bad(format!("unsupported integer width {} bytes", flags[1])));
    }
    r.read_exact(&mut b4)?;
    let patterns = u32::from_le_bytes(b4) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| bad("matrix size overflow".into()))?;
    let mut raw = vec![0u8; len * 2];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok((
        IntMatrix {
            rows,
            cols,
            patterns,
            data,
        },
        symmetric,
    ))
}

/// N×K hetero-associative weights, `W_ik = Σ_μ ξ_i^μ η_k^μ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeteroWeights(IntMatrix);

impl HeteroWeights {
    /// Watermark (output) length N.
    pub fn rows(&self) -> usize {
        self.0.rows
    }

    /// Feature (input) length K.
    pub fn cols(&self) -> usize {
        self.0.cols
    }

    pub fn patterns(&self) -> usize {
        self.0.patterns
    }

    pub fn get(&self, i: usize, k: usize) -> i16 {
        self.0.data[i * self.0.cols + k]
    }

    pub fn max_abs(&self) -> i16 {
        self.0.max_abs()
    }

    /// `x_i = sgn(Σ_k W_ik y_k)`.
    pub fn recall(&self, y: &BipolarVector) -> Result<BipolarVector> {
        check_len(self.cols(), y.len())?;
        let signs = y.to_signs();
        BipolarVector::from_fn(self.rows(), |i| {
            let h: i64 = self
                .0
                .row(i)
                .iter()
                .zip(&signs)
                .map(|(&w, &s)| i64::from(w) * i64::from(s))
                .sum();
            h >= 0
        })
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        write_matrix(w, &self.0, false)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let (m, symmetric) = read_matrix(r)?;
        if symmetric {
            return Err(Error::Format {
                format: "AWMW1",
                reason: "expected a non-symmetric hetero-associative matrix".into(),
            });
        }
        Ok(HeteroWeights(m))
    }
}

/// Symmetric N×N auto-associative weights, `W_ij = Σ_μ ξ_i^μ ξ_j^μ`. The
/// diagonal is stored (value P) but recall never reads it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoWeights(IntMatrix);

impl AutoWeights {
    pub fn size(&self) -> usize {
        self.0.rows
    }

    pub fn patterns(&self) -> usize {
        self.0.patterns
    }

    pub fn get(&self, i: usize, j: usize) -> i16 {
        self.0.data[i * self.0.cols + j]
    }

    pub fn max_abs(&self) -> i16 {
        self.0.max_abs()
    }

    /// One synchronous update `x_i ← sgn(Σ_{j≠i} W_ij x_j)` of every neuron.
    pub fn step(&self, x: &BipolarVector) -> Result<BipolarVector> {
        check_len(self.size(), x.len())?;
        let signs = x.to_signs();
        let field = |row: &[i16], range: std::ops::Range<usize>| -> i64 {
            row[range.clone()]
                .iter()
                .zip(&signs[range])
                .map(|(&w, &s)| i64::from(w) * i64::from(s))
                .sum()
        };
        BipolarVector::from_fn(self.size(), |i| {
            let row = self.0.row(i);
            field(row, 0..i) + field(row, i + 1..row.len()) >= 0
        })
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        write_matrix(w, &self.0, true)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let (m, symmetric) = read_matrix(r)?;
        let bad = |reason: &str| Error::Format {
            format: "AWMW1",
            reason: reason.into(),
        };
        if !symmetric || m.rows != m.cols {
            return Err(bad("expected a square symmetric matrix"));
        }
        for i in 0..m.rows {
            for j in 0..i {
                if m.data[i * m.cols + j] != m.data[j * m.cols + i] {
                    return Err(bad("matrix flagged symmetric is not"));
                }
            }
        }
        Ok(AutoWeights(m))
    }
}

/// Integer Hebbian sums for the feature → watermark layer.
pub fn train_hetero(store: &PatternStore) -> Result<HeteroWeights> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let p = store.len();
    check_weight_range(p)?;
    let (n, k) = (store.assoc_len(), store.key_len());
    let assoc = bit_planes(store.associates());
    let keys = bit_planes(store.keys());
    let mut data = Vec::with_capacity(n * k);
    for a in &assoc {
        data.extend(keys.iter().map(|b| hebbian_entry(p, a, b)));
    }
    Ok(HeteroWeights(IntMatrix {
        rows: n,
        cols: k,
        patterns: p,
        data,
    }))
}

/// Integer Hebbian sums for the watermark auto-associative layer.
pub fn train_auto(store: &PatternStore) -> Result<AutoWeights> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let p = store.len();
    check_weight_range(p)?;
    let n = store.assoc_len();
    let planes = bit_planes(store.associates());
    let mut data = vec![0i16; n * n];
    for i in 0..n {
        for j in 0..=i {
            let w = hebbian_entry(p, &planes[i], &planes[j]);
            data[i * n + j] = w;
            data[j * n + i] = w;
        }
    }
    Ok(AutoWeights(IntMatrix {
        rows: n,
        cols: n,
        patterns: p,
        data,
    }))
}

/// `sgn(Σ_k W_ik y_k)`; see [`HeteroWeights::recall`].
pub fn hetero_recall(w: &HeteroWeights, y: &BipolarVector) -> Result<BipolarVector> {
    w.recall(y)
}

/// One synchronous update; see [`AutoWeights::step`].
pub fn auto_step(w: &AutoWeights, x: &BipolarVector) -> Result<BipolarVector> {
    w.step(x)
}

fn project(patterns: &[BipolarVector], coeffs: &[i64], len: usize, bias: impl Fn(usize) -> i64) -> Result<BipolarVector> {
    BipolarVector::from_fn(len, |i| {
        let h: i64 = patterns
            .iter()
            .zip(coeffs)
            .map(|(p, &c)| if p.is_positive(i) { c } else { -c })
            .sum();
        h - bias(i) >= 0
    })
}

/// Hetero-layer output computed from the stored patterns without weights:
/// `h_i = Σ_μ ξ_i^μ (η^μ · y)`.
pub fn pattern_space_hetero(store: &PatternStore, y: &BipolarVector) -> Result<BipolarVector> {
    check_len(store.key_len(), y.len())?;
    let coeffs = store
        .keys()
        .iter()
        .map(|eta| eta.dot(y))
        .collect::<Result<Vec<_>>>()?;
    project(store.associates(), &coeffs, store.assoc_len(), |_| 0)
}

/// Auto-layer step computed from the stored patterns:
/// `h_i = Σ_μ ξ_i^μ (ξ^μ · x) − P x_i`.
pub fn pattern_space_auto(store: &PatternStore, x: &BipolarVector) -> Result<BipolarVector> {
    check_len(store.assoc_len(), x.len())?;
    let coeffs = store
        .associates()
        .iter()
        .map(|xi| xi.dot(x))
        .collect::<Result<Vec<_>>>()?;
    let p = store.len() as i64;
    project(store.associates(), &coeffs, store.assoc_len(), |i| {
        p * i64::from(x.get(i))
    })
}

/// Evaluation strategy for the two layers.
pub trait RecallEngine {
    fn key_len(&self) -> usize;
    fn assoc_len(&self) -> usize;
    fn hetero(&self, y: &BipolarVector) -> Result<BipolarVector>;
    fn auto_step(&self, x: &BipolarVector) -> Result<BipolarVector>;
}

impl RecallEngine for PatternStore {
    fn key_len(&self) -> usize {
        PatternStore::key_len(self)
    }

    fn assoc_len(&self) -> usize {
        PatternStore::assoc_len(self)
    }

    fn hetero(&self, y: &BipolarVector) -> Result<BipolarVector> {
        pattern_space_hetero(self, y)
    }

    fn auto_step(&self, x: &BipolarVector) -> Result<BipolarVector> {
        pattern_space_auto(self, x)
    }
}

/// Engine backed by trained weight matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseEngine {
    pub hetero: HeteroWeights,
    pub auto: AutoWeights,
}

impl DenseEngine {
    pub fn new(hetero: HeteroWeights, auto: AutoWeights) -> Result<Self> {
        check_len(hetero.rows(), auto.size())?;
        Ok(DenseEngine { hetero, auto })
    }

    pub fn train(store: &PatternStore) -> Result<Self> {
        Ok(DenseEngine {
            hetero: train_hetero(store)?,
            auto: train_auto(store)?,
        })
    }
}

impl RecallEngine for DenseEngine {
    fn key_len(&self) -> usize {
        self.hetero.cols()
    }

    fn assoc_len(&self) -> usize {
        self.hetero.rows()
    }

    fn hetero(&self, y: &BipolarVector) -> Result<BipolarVector> {
        self.hetero.recall(y)
    }

    fn auto_step(&self, x: &BipolarVector) -> Result<BipolarVector> {
        self.auto.step(x)
    }
}

/// Which engine to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineKind {
    /// Pattern-space when `P (N + K) < N K`, dense otherwise.
    #[default]
    Auto,
    Dense,
    PatternSpace,
}

impl EngineKind {
    pub fn resolve(self, p: usize, n: usize, k: usize) -> EngineKind {
        match self {
            EngineKind::Auto if p * (n + k) < n * k => EngineKind::PatternSpace,
            EngineKind::Auto => EngineKind::Dense,
            other => other,
        }
    }
}

/// A built engine of either kind.
#[derive(Debug, Clone)]
pub enum Engine {
    Dense(DenseEngine),
    PatternSpace(PatternStore),
}

impl Engine {
    pub fn build(store: &PatternStore, kind: EngineKind) -> Result<Self> {
        match kind.resolve(store.len(), store.assoc_len(), store.key_len()) {
            EngineKind::Dense => Ok(Engine::Dense(DenseEngine::train(store)?)),
            _ => Ok(Engine::PatternSpace(store.clone())),
        }
    }
}

impl RecallEngine for Engine {
    fn key_len(&self) -> usize {
        match self {
            Engine::Dense(e) => e.key_len(),
            Engine::PatternSpace(s) => RecallEngine::key_len(s),
        }
    }

    fn assoc_len(&self) -> usize {
        match self {
            Engine::Dense(e) => e.assoc_len(),
            Engine::PatternSpace(s) => RecallEngine::assoc_len(s),
        }
    }

    fn hetero(&self, y: &BipolarVector) -> Result<BipolarVector> {
        match self {
            Engine::Dense(e) => e.hetero(y),
            Engine::PatternSpace(s) => s.hetero(y),
        }
    }

    fn auto_step(&self, x: &BipolarVector) -> Result<BipolarVector> {
        match self {
            Engine::Dense(e) => e.auto_step(x),
            Engine::PatternSpace(s) => s.auto_step(x),
        }
    }
}

/// Stored pair that overlaps are measured against.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a> {
    pub key: &'a BipolarVector,
    pub associate: &'a BipolarVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecallOptions {
    pub t_max: usize,
    pub record_states: bool,
}

impl Default for RecallOptions {
    fn default() -> Self {
        RecallOptions {
            t_max: 20,
            record_states: false,
        }
    }
}

/// Outcome of one associative recall, t = -1 (feature input) through t_max.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallTrace {
    /// Overlap of the input with the reference key (t = -1).
    pub feature_overlap: Option<Overlap>,
    /// Overlap with the reference watermark for t = 0..=t_max; empty
    /// without a reference.
    pub state_overlaps: Vec<Overlap>,
    /// States actually computed, x^0 up to the point where iteration stopped.
    pub states: Option<Vec<BipolarVector>>,
    /// x^{t_max}.
    pub final_state: BipolarVector,
    pub t_max: usize,
    /// First t with x^t = x^{t-1}.
    pub converged_at: Option<usize>,
    /// First t with x^t = x^{t-2} != x^{t-1} (period-2 orbit).
    pub two_cycle_at: Option<usize>,
}

impl RecallTrace {
    /// HMM output overlap m_0, when a reference was given.
    pub fn hetero_overlap(&self) -> Option<Overlap> {
        self.state_overlaps.first().copied()
    }

    pub fn final_overlap(&self) -> Option<Overlap> {
        self.state_overlaps.last().copied()
    }
}

/// Feature → watermark recall: one hetero-layer pass (t = 0) followed by up
/// to `t_max` synchronous auto-layer steps. Iteration stops at a fixed point
/// or a period-2 orbit; the remaining times are filled from the (exactly
/// periodic) orbit, so `state_overlaps` always has `t_max + 1` entries.
pub fn awm_recall<E: RecallEngine + ?Sized>(
    engine: &E,
    y: &BipolarVector,
    opts: RecallOptions,
    reference: Option<Reference<'_>>,
) -> Result<RecallTrace> {
    let feature_overlap = reference.map(|r| r.key.overlap(y)).transpose()?;
    if let Some(r) = reference {
        check_len(engine.assoc_len(), r.associate.len())?;
    }
    let mut computed = vec![engine.hetero(y)?];
    let mut converged_at = None;
    let mut two_cycle_at = None;
    for t in 1..=opts.t_max {
        let next = engine.auto_step(&computed[t - 1])?;
        let fixed = next == computed[t - 1];
        let cycle = !fixed && t >= 2 && next == computed[t - 2];
        computed.push(next);
        if fixed {
            converged_at = Some(t);
            break;
        }
        if cycle {
            two_cycle_at = Some(t);
            break;
        }
    }
    let last = computed.len() - 1;
    let state_at = |t: usize| -> &BipolarVector {
        if t <= last {
            &computed[t]
        } else if converged_at.is_some() {
            &computed[last]
        } else {
            &computed[last - (t - last) % 2]
        }
    };
    let state_overlaps = match reference {
        Some(r) => (0..=opts.t_max)
            .map(|t| r.associate.overlap(state_at(t)))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let final_state = state_at(opts.t_max).clone();
    Ok(RecallTrace {
        feature_overlap,
        state_overlaps,
        states: opts.record_states.then_some(computed),
        final_state,
        t_max: opts.t_max,
        converged_at,
        two_cycle_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{degrade_to_overlap_with, random_bipolar, Seed};

    fn v(signs: &[i8]) -> BipolarVector {
        BipolarVector::from_signs(signs).unwrap()
    }

    fn brute_hetero(store: &PatternStore) -> Vec<Vec<i64>> {
        let (n, k) = (store.assoc_len(), store.key_len());
        (0..n)
            .map(|i| {
                (0..k)
                    .map(|kk| {
                        (0..store.len())
                            .map(|mu| {
                                i64::from(store.associates()[mu].get(i))
                                    * i64::from(store.keys()[mu].get(kk))
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn hetero_single_pattern() {
        let store = PatternStore::new(vec![v(&[1, -1])], vec![v(&[1])]).unwrap();
        let w = train_hetero(&store).unwrap();
        assert_eq!((w.get(0, 0), w.get(0, 1)), (1, -1));
    }

    #[test]
    fn hetero_cancellation() {
        let eta = random_bipolar(9, Seed(1), 0).unwrap();
        let xi = random_bipolar(5, Seed(1), 1).unwrap();
        let store = PatternStore::new(vec![eta.clone(), eta.negated()], vec![xi.clone(), xi]).unwrap();
        let w = train_hetero(&store).unwrap();
        assert_eq!(w.max_abs(), 0);
    }

    #[test]
    fn hetero_matches_brute_force() {
        let mut rng = Seed(7).rng(0);
        let store = PatternStore::random(3, 4, 2, &mut rng).unwrap();
        let w = train_hetero(&store).unwrap();
        let brute = brute_hetero(&store);
        for (i, row) in brute.iter().enumerate() {
            for (k, &b) in row.iter().enumerate() {
                assert_eq!(i64::from(w.get(i, k)), b);
            }
        }
    }

    #[test]
    fn empty_and_mismatched_stores() {
        assert!(matches!(PatternStore::new(vec![], vec![]), Err(Error::EmptyStore)));
        assert!(matches!(
            PatternStore::new(vec![v(&[1])], vec![]),
            Err(Error::CountMismatch(_))
        ));
        assert!(PatternStore::new(vec![v(&[1]), v(&[1, 1])], vec![v(&[1]), v(&[1])]).is_err());
    }

    #[test]
    fn hetero_recall_examples() {
        let mut rng = Seed(2).rng(0);
        let store = PatternStore::random(1, 33, 17, &mut rng).unwrap();
        let w = train_hetero(&store).unwrap();
        let (eta, xi) = (&store.keys()[0], &store.associates()[0]);
        assert_eq!(&w.recall(eta).unwrap(), xi);
        assert_eq!(w.recall(&eta.negated()).unwrap(), xi.negated());
        assert!(matches!(
            w.recall(xi),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn auto_examples() {
        let store = PatternStore::new(vec![v(&[1])], vec![v(&[1, -1])]).unwrap();
        let w = train_auto(&store).unwrap();
        assert_eq!((w.get(0, 1), w.get(1, 0)), (-1, -1));

        let mut rng = Seed(3).rng(0);
        let store = PatternStore::random(1, 5, 40, &mut rng).unwrap();
        let w = train_auto(&store).unwrap();
        let xi = &store.associates()[0];
        assert_eq!(&w.step(xi).unwrap(), xi);
        assert_eq!(w.step(&xi.negated()).unwrap(), xi.negated());
    }

    #[test]
    fn auto_is_symmetric_and_matches_brute_force() {
        let mut rng = Seed(4).rng(0);
        let store = PatternStore::random(3, 2, 6, &mut rng).unwrap();
        let w = train_auto(&store).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(w.get(i, j), w.get(j, i));
                let b: i64 = store
                    .associates()
                    .iter()
                    .map(|x| i64::from(x.get(i)) * i64::from(x.get(j)))
                    .sum();
                assert_eq!(i64::from(w.get(i, j)), b);
            }
        }
    }

    #[test]
    fn auto_step_matches_direct_field() {
        let mut rng = Seed(5).rng(0);
        let store = PatternStore::random(2, 3, 32, &mut rng).unwrap();
        let w = train_auto(&store).unwrap();
        let x = random_bipolar(32, Seed(5), 9).unwrap();
        let direct = BipolarVector::from_fn(32, |i| {
            let h: i64 = (0..32)
                .filter(|&j| j != i)
                .map(|j| {
                    store
                        .associates()
                        .iter()
                        .map(|p| i64::from(p.get(i)) * i64::from(p.get(j)))
                        .sum::<i64>()
                        * i64::from(x.get(j))
                })
                .sum();
            h >= 0
        })
        .unwrap();
        assert_eq!(w.step(&x).unwrap(), direct);
    }

    #[test]
    fn orthogonal_input_ties_to_plus_one() {
        let eta = v(&[1, 1, -1, -1]);
        let xi = random_bipolar(12, Seed(6), 0).unwrap();
        let store = PatternStore::new(vec![eta], vec![xi]).unwrap();
        let y = v(&[1, -1, 1, -1]);
        let out = pattern_space_hetero(&store, &y).unwrap();
        assert_eq!(out, BipolarVector::ones(12).unwrap());
        assert_eq!(train_hetero(&store).unwrap().recall(&y).unwrap(), out);
    }

    #[test]
    fn auto_tie_when_field_cancels() {
        // P = N = 2 with orthogonal patterns: Σ_μ ξ_i^μ (ξ^μ·x) = P x_i for
        // x = ξ^1, so the j≠i field is zero and the output is +1 everywhere.
        let a = v(&[1, 1]);
        let b = v(&[1, -1]);
        let store = PatternStore::new(vec![v(&[1]), v(&[-1])], vec![a.clone(), b]).unwrap();
        let x = v(&[-1, -1]);
        let ps = pattern_space_auto(&store, &x).unwrap();
        let dense = train_auto(&store).unwrap().step(&x).unwrap();
        assert_eq!(ps, dense);
        assert_eq!(ps, BipolarVector::ones(2).unwrap());
    }

    #[test]
    fn engine_selection_rule() {
        assert_eq!(EngineKind::Auto.resolve(160, 2000, 2000), EngineKind::PatternSpace);
        assert_eq!(EngineKind::Auto.resolve(1000, 2000, 2000), EngineKind::Dense);
        assert_eq!(EngineKind::Dense.resolve(1, 2000, 2000), EngineKind::Dense);
    }

    #[test]
    fn recall_single_pair() {
        let mut rng = Seed(8).rng(0);
        let store = PatternStore::random(1, 64, 48, &mut rng).unwrap();
        let r = store.reference(0);
        let trace = awm_recall(&store, r.key, RecallOptions::default(), Some(r)).unwrap();
        assert_eq!(trace.state_overlaps.len(), 21);
        assert!(trace.state_overlaps.iter().all(|m| m.value() == 1.0));
        assert_eq!(trace.converged_at, Some(1));
        assert_eq!(trace.feature_overlap.unwrap().value(), 1.0);
    }

    #[test]
    fn zero_horizon_is_hetero_recall() {
        let mut rng = Seed(9).rng(0);
        let store = PatternStore::random(6, 64, 64, &mut rng).unwrap();
        let y = random_bipolar(64, Seed(9), 1).unwrap();
        let opts = RecallOptions {
            t_max: 0,
            record_states: true,
        };
        let trace = awm_recall(&store, &y, opts, None).unwrap();
        let direct = train_hetero(&store).unwrap().recall(&y).unwrap();
        assert_eq!(trace.final_state, direct);
        assert_eq!(trace.states.unwrap().len(), 1);
        assert!(trace.state_overlaps.is_empty());
    }

    #[test]
    fn padded_trace_equals_full_iteration() {
        let mut rng = Seed(10).rng(0);
        let store = PatternStore::random(30, 100, 100, &mut rng).unwrap();
        let r = store.reference(0);
        let y = degrade_to_overlap_with(r.key, 0.3, &mut rng).unwrap().vector;
        let trace = awm_recall(&store, &y, RecallOptions::default(), Some(r)).unwrap();
        let mut x = store.hetero(&y).unwrap();
        let mut expected = vec![r.associate.overlap(&x).unwrap()];
        for _ in 0..20 {
            x = store.auto_step(&x).unwrap();
            expected.push(r.associate.overlap(&x).unwrap());
        }
        assert_eq!(trace.state_overlaps, expected);
        assert_eq!(trace.final_state, x);
    }

    #[test]
    fn weight_file_roundtrip() {
        let mut rng = Seed(11).rng(0);
        let store = PatternStore::random(5, 7, 9, &mut rng).unwrap();
        let engine = DenseEngine::train(&store).unwrap();
        let mut buf = Vec::new();
        engine.hetero.write_to(&mut buf).unwrap();
        engine.auto.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"AWMW1");
        let mut r = &buf[..];
        assert_eq!(HeteroWeights::read_from(&mut r).unwrap(), engine.hetero);
        assert_eq!(AutoWeights::read_from(&mut r).unwrap(), engine.auto);
        assert!(AutoWeights::read_from(&buf[..]).is_err());
    }
}
