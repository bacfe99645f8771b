//! Simulation and theory experiments producing CSV tables.

use std::fmt::Write as _;

use awm_core::attacks::{gaussian_attack, jpeg_attack, JpegParams, NoiseParams};
use awm_core::memory::{awm_recall, Engine, EngineKind, PatternStore, RecallEngine, RecallOptions, Reference};
use awm_core::neurodynamics::{hmm_theory_step, CriticalOverlap, Equilibrium, MacroState, Mode, Solver, TheoryParams};
use awm_core::patterns::{degrade_to_overlap_with, random_bipolar, random_bipolar_with, BipolarVector, Seed};
use awm_core::watermark::{extract_features, info_cost_awm, info_cost_zero, zw_extract, zw_map, GrayImage};
use rayon::prelude::*;

use crate::config::{Decimal, ExperimentConfig, Sizes};
use crate::corpus::CorpusImage;
use crate::stats::TrialSummary;
use crate::streams::{stream, BASIN, BER_NOISE, BER_PADDING, BER_WATERMARK, EVOLUTION};
use crate::HarnessError;

/// Marker for values that do not exist for a row.
pub const NA: &str = "n/a";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |v| v.to_string())
}

// ---------------------------------------------------------------- evolution

/// One initial-overlap grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPoint {
    pub m_star: f64,
    /// Overlap actually realized by the degraded inputs.
    pub achieved: f64,
    /// `series[trial]` holds overlaps for t = -1..=t_max.
    pub series: Vec<Vec<f64>>,
    pub summary: TrialSummary,
    /// Theory for t = -1..=t_max.
    pub theory: Vec<f64>,
}

/// Overlap of one recall with its stored watermark for t = -1..=t_max.
fn evolution_trial(sizes: Sizes, m_star: f64, t_max: usize, seed: Seed, s: u64) -> Result<Vec<f64>, HarnessError> {
    let mut rng = seed.rng(s);
    let store = PatternStore::random(sizes.p, sizes.k, sizes.n, &mut rng)?;
    let input = degrade_to_overlap_with(&store.keys()[0], m_star, &mut rng)?;
    let engine = Engine::build(&store, EngineKind::Auto)?;
    let opts = RecallOptions { t_max, record_states: false };
    let trace = awm_recall(&engine, &input.vector, opts, Some(store.reference(0)))?;
    let mut out = Vec::with_capacity(t_max + 2);
    out.push(input.achieved.value());
    out.extend(trace.state_overlaps.iter().map(|m| m.value()));
    Ok(out)
}

/// Simulated and theoretical overlap evolution for each grid point.
pub fn overlap_evolution(cfg: &ExperimentConfig, solver: &Solver) -> Result<Vec<EvolutionPoint>, HarnessError> {
    cfg.validate()?;
    let sizes = cfg.sizes;
    let params = TheoryParams::new(sizes.alpha(), sizes.gamma(), cfg.order, cfg.t_max)?;
    cfg.m_grid
        .par_iter()
        .enumerate()
        .map(|(g, &m_star)| {
            let series = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| evolution_trial(sizes, m_star, cfg.t_max, cfg.seed, stream(EVOLUTION, g, trial)))
                .collect::<Result<Vec<_>, _>>()?;
            let achieved = series[0][0];
            let state = solver.trajectory(&params, achieved, Mode::Awm)?;
            let theory = state.overlaps().map(|(_, m)| m).collect();
            let summary = TrialSummary::from_series(&series)
                .ok_or_else(|| HarnessError::Internal("ragged trial series".into()))?;
            Ok(EvolutionPoint {
                m_star,
                achieved,
                series,
                summary,
                theory,
            })
        })
        .collect()
}

/// `m_star,t,mean,std,theory`, t from -1.
pub fn evolution_csv(points: &[EvolutionPoint]) -> String {
    let mut out = String::from("m_star,t,mean,std,theory\n");
    for p in points {
        for (i, ((mean, std), theory)) in p.summary.mean.iter().zip(&p.summary.std).zip(&p.theory).enumerate() {
            let t = i as i64 - 1;
            let _ = writeln!(out, "{},{t},{mean},{std},{theory}", p.m_star);
        }
    }
    out
}

/// Per-trial dump `m_star,trial,t,m`.
pub fn evolution_dump_csv(points: &[EvolutionPoint]) -> String {
    let mut out = String::from("m_star,trial,t,m\n");
    for p in points {
        for (trial, series) in p.series.iter().enumerate() {
            for (i, m) in series.iter().enumerate() {
                let _ = writeln!(out, "{},{trial},{},{m}", p.m_star, i as i64 - 1);
            }
        }
    }
    out
}

// ---------------------------------------------------------------- basin

/// Simulated overlap at the horizon from a perfect start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedEquilibrium {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinRow {
    pub alpha: f64,
    pub mode: Mode,
    pub m_critical: CriticalOverlap,
    pub m_equilibrium: Equilibrium,
    pub simulated: Option<SimulatedEquilibrium>,
}

/// Theory basin for both modes at each α, rows ordered by α then AMM, AWM.
pub fn theory_basin(alphas: &[f64], gamma: f64, order: usize, solver: &Solver) -> Result<Vec<BasinRow>, HarnessError> {
    let jobs: Vec<(f64, Mode)> = alphas
        .iter()
        .flat_map(|&a| [(a, Mode::Amm), (a, Mode::Awm)])
        .collect();
    jobs.par_iter()
        .map(|&(alpha, mode)| {
            let params = TheoryParams::new(alpha, gamma, order, 0)?;
            Ok(BasinRow {
                alpha,
                mode,
                m_critical: solver.critical_overlap(&params, mode)?,
                m_equilibrium: solver.equilibrium_overlap(&params, mode)?,
                simulated: None,
            })
        })
        .collect()
}

fn basin_trial(sizes: Sizes, mode: Mode, t_max: usize, seed: Seed, s: u64) -> Result<f64, HarnessError> {
    let mut rng = seed.rng(s);
    let store = PatternStore::random(sizes.p, sizes.k, sizes.n, &mut rng)?;
    let engine = Engine::build(&store, EngineKind::Auto)?;
    let target = &store.associates()[0];
    let opts = RecallOptions { t_max, record_states: false };
    let last = match mode {
        Mode::Awm => awm_recall(&engine, &store.keys()[0], opts, Some(store.reference(0)))?
            .final_state,
        Mode::Amm => {
            let mut x = target.clone();
            for _ in 0..t_max {
                let next = engine.auto_step(&x)?;
                if next == x {
                    break;
                }
                x = next;
            }
            x
        }
    };
    Ok(target.overlap(&last)?.value())
}

/// Theory basin plus simulated `m_{t_max}` from perfect starts. Every α in
/// the grid must give an integer `P = αN`.
pub fn simulated_basin(cfg: &ExperimentConfig, solver: &Solver) -> Result<Vec<BasinRow>, HarnessError> {
    cfg.validate()?;
    let sizes: Vec<Sizes> = cfg
        .alpha_grid
        .iter()
        .map(|a| {
            let p = a.times(cfg.sizes.n).filter(|&p| p > 0).ok_or_else(|| {
                HarnessError::Config(format!("alpha = {a} times N = {} is not a positive integer", cfg.sizes.n))
            })?;
            Ok(Sizes { p, ..cfg.sizes })
        })
        .collect::<Result<_, HarnessError>>()?;
    let alphas: Vec<f64> = cfg.alpha_grid.iter().map(Decimal::value).collect();
    let mut rows = theory_basin(&alphas, cfg.sizes.gamma(), cfg.order, solver)?;
    let sims: Vec<SimulatedEquilibrium> = rows
        .par_iter()
        .enumerate()
        .map(|(r, row)| {
            let g = r / 2;
            let finals = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    basin_trial(sizes[g], row.mode, cfg.t_max, cfg.seed, stream(BASIN, r, trial))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (mean, std) = crate::stats::mean_std(finals.iter().copied());
            Ok(SimulatedEquilibrium { mean, std })
        })
        .collect::<Result<_, HarnessError>>()?;
    for (row, sim) in rows.iter_mut().zip(sims) {
        row.simulated = Some(sim);
    }
    Ok(rows)
}

/// `alpha,m_critical,m_equilibrium,model`, plus `m_sim_mean,m_sim_std` when
/// any row carries simulation results.
pub fn basin_csv(rows: &[BasinRow]) -> String {
    let with_sim = rows.iter().any(|r| r.simulated.is_some());
    let mut out = String::from("alpha,m_critical,m_equilibrium,model");
    if with_sim {
        out.push_str(",m_sim_mean,m_sim_std");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{}",
            r.alpha,
            opt(r.m_critical.value()),
            r.m_equilibrium.overlap,
            r.mode.label()
        );
        if with_sim {
            let (m, s) = r.simulated.map_or((None, None), |s| (Some(s.mean), Some(s.std)));
            let _ = write!(out, ",{},{}", opt(m), opt(s));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- BER

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attack {
    None,
    Jpeg(JpegParams),
    Noise { mean: f64, std: f64, clamp: bool },
}

impl Attack {
    fn apply(&self, img: &GrayImage, seed: Seed, index: usize) -> Result<GrayImage, HarnessError> {
        Ok(match *self {
            Attack::None => img.clone(),
            Attack::Jpeg(q) => jpeg_attack(img, q)?,
            Attack::Noise { mean, std, clamp } => {
                let p = NoiseParams::new(mean, std, seed)?
                    .with_stream(stream(BER_NOISE, index, 0))
                    .with_clamp(clamp);
                gaussian_attack(img, &p)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerConfig {
    pub n: usize,
    pub k: usize,
    /// Loading rate after padding with random pairs.
    pub alpha: Decimal,
    pub t_max: usize,
    pub order: usize,
    pub seed: Seed,
    pub attack: Attack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub image: String,
    pub m_star: f64,
    /// Sign flips between clean and attacked features.
    pub feature_flips: usize,
    /// Absent when K ≠ N.
    pub ber_zero: Option<f64>,
    pub zero_errors: Option<usize>,
    pub ber_hmm: f64,
    pub ber_awm: f64,
    pub awm_errors: usize,
    pub theory_hmm: f64,
    pub theory_awm: f64,
}

/// Theory for signed initial overlaps, using `m_t(-m) = -m_t(m)`.
fn signed_theory(m: f64, f: impl Fn(f64) -> Result<f64, HarnessError>) -> Result<f64, HarnessError> {
    let v = f(m.abs())?;
    Ok(if m < 0.0 { -v } else { v })
}

/// Stores every image's clean feature with its own watermark, pads to
/// `P = αN` with random pairs, attacks each image and measures the three BERs.
pub fn ber_experiment(cfg: &BerConfig, images: &[CorpusImage], solver: &Solver) -> Result<Vec<BerRow>, HarnessError> {
    let (n, k) = (cfg.n, cfg.k);
    if n == 0 || k == 0 {
        return Err(HarnessError::Config("N and K must be positive".into()));
    }
    let p = cfg.alpha.times(n).ok_or_else(|| {
        HarnessError::Config(format!("alpha = {} times N = {n} is not an integer", cfg.alpha))
    })?;
    if p < images.len() {
        return Err(HarnessError::Config(format!(
            "alpha N = {p} is smaller than the corpus size {}",
            images.len()
        )));
    }
    let features = images
        .par_iter()
        .map(|c| Ok(extract_features(&c.image, k)?.into_signs()))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut watermarks = (0..images.len())
        .map(|i| random_bipolar(n, cfg.seed, stream(BER_WATERMARK, i, 0)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut keys = features.clone();
    let mut rng = cfg.seed.rng(stream(BER_PADDING, 0, 0));
    for _ in images.len()..p {
        keys.push(random_bipolar_with(k, &mut rng)?);
        watermarks.push(random_bipolar_with(n, &mut rng)?);
    }
    let store = PatternStore::new(keys, watermarks)?;
    let engine = Engine::build(&store, EngineKind::Auto)?;
    let params = TheoryParams::new(p as f64 / n as f64, k as f64 / n as f64, cfg.order, cfg.t_max)?;
    let opts = RecallOptions { t_max: cfg.t_max, record_states: true };

    images
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let clean = &features[i];
            let wm = &store.associates()[i];
            let attacked = cfg.attack.apply(&img.image, cfg.seed, i)?;
            let y = extract_features(&attacked, k)?.into_signs();
            let feature_flips = clean.mismatches(&y)?;
            let m_star = clean.overlap(&y)?.value();
            let (ber_zero, zero_errors) = if k == n {
                let key = zw_map(clean, wm)?;
                let out: BipolarVector = zw_extract(&y, &key)?;
                (Some(out.bit_error_rate(wm)?), Some(out.mismatches(wm)?))
            } else {
                (None, None)
            };
            let reference = Reference { key: clean, associate: wm };
            let trace = awm_recall(&engine, &y, opts, Some(reference))?;
            let hmm_state = &trace.states.as_ref().expect("states recorded")[0];
            let awm_errors = trace.final_state.mismatches(wm)?;
            let theory_m0 = signed_theory(m_star, |m| Ok(hmm_theory_step(&params, m)?.m0))?;
            let theory_mt = signed_theory(m_star, |m| {
                Ok(solver.trajectory(&params, m, Mode::Awm)?.final_overlap())
            })?;
            Ok(BerRow {
                image: img.name.clone(),
                m_star,
                feature_flips,
                ber_zero,
                zero_errors,
                ber_hmm: hmm_state.bit_error_rate(wm)?,
                ber_awm: trace.final_state.bit_error_rate(wm)?,
                awm_errors,
                theory_hmm: (1.0 - theory_m0) / 2.0,
                theory_awm: (1.0 - theory_mt) / 2.0,
            })
        })
        .collect()
}

/// `image,m_star,ber_zero,ber_hmm,ber_awm,theory_hmm,theory_awm`.
pub fn ber_csv(rows: &[BerRow]) -> String {
    let mut out = String::from("image,m_star,ber_zero,ber_hmm,ber_awm,theory_hmm,theory_awm\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.image,
            r.m_star,
            opt(r.ber_zero),
            r.ber_hmm,
            r.ber_awm,
            r.theory_hmm,
            r.theory_awm
        );
    }
    out
}

// ---------------------------------------------------------------- info cost

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoCost {
    pub p: u64,
    pub k: u64,
    pub n: u64,
    pub zero: u128,
    pub awm: u128,
}

impl InfoCost {
    /// AWM cost over zero-watermark cost.
    pub fn ratio(&self) -> f64 {
        self.awm as f64 / self.zero as f64
    }
}

pub fn info_cost(p: u64, k: u64, n: u64) -> Result<InfoCost, HarnessError> {
    Ok(InfoCost {
        p,
        k,
        n,
        zero: info_cost_zero(p, k)?,
        awm: info_cost_awm(p, k, n)?,
    })
}

/// `P,K,N,cost_zero,cost_awm,ratio`.
pub fn info_cost_csv(rows: &[InfoCost]) -> String {
    let mut out = String::from("P,K,N,cost_zero,cost_awm,ratio\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.p, r.k, r.n, r.zero, r.awm, r.ratio());
    }
    out
}

// ---------------------------------------------------------------- theory

/// `t,m,sigma2,U`, with `n/a` where U is undefined.
pub fn trajectory_csv(state: &MacroState) -> String {
    let mut out = String::from("t,m,sigma2,U\n");
    for (t, m) in state.overlaps() {
        let _ = writeln!(
            out,
            "{t},{m},{},{}",
            opt(state.sigma2(t)),
            opt(state.u(t))
        );
    }
    out
}
