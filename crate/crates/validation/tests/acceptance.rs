//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use awm_core::attacks::JpegParams;
use awm_core::memory::{
    awm_recall, pattern_space_auto, pattern_space_hetero, train_auto, train_hetero, DenseEngine, PatternStore,
    RecallEngine, RecallOptions,
};
use awm_core::neurodynamics::{
    hmm_theory_step, q_integral, CorrelationRule, CriticalOverlap, Mode, Solver, TheoryParams,
};
use awm_core::patterns::{random_bipolar_with, Seed};
use awm_core::watermark::{dct2d, zw_extract, zw_map, GrayImage};
use awm_harness::config::ExperimentConfig;
use awm_harness::config::Sizes;
use awm_harness::corpus::synthetic;
use awm_harness::experiments::{
    ber_csv, ber_experiment, evolution_csv, overlap_evolution, simulated_basin, basin_csv, Attack, BerConfig,
};
use rand::seq::index::sample;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:.1?}, limit {limit:?}"))
}

/// erf by the positive series `2/√π e^{-x²} Σ (2x²)^n x / (1·3·…·(2n+1))`.
fn erf_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_oracle(-x);
    }
    if x > 6.0 {
        return 1.0;
    }
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-18 * sum {
        n += 1.0;
        term *= 2.0 * x * x / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-x * x).exp() * sum
}

fn c1_closed_forms() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let alpha = 0.01 + 0.0029 * i as f64;
        let gamma = 0.3 + 0.007 * ((i * 37) % 100) as f64;
        let m = ((i * 61) % 100) as f64 / 99.0;
        let params = TheoryParams::new(alpha, gamma, 4, 0).map_err(|e| e.to_string())?;
        let step = hmm_theory_step(&params, m).map_err(|e| e.to_string())?;
        check(step.sigma_star_sq == alpha * gamma, || format!("sigma_*^2 at alpha={alpha} gamma={gamma}"))?;
        let want = erf_oracle(gamma * m / (SQRT_2 * (alpha * gamma).sqrt()));
        worst = worst.max((step.m0 - want).abs());
    }
    check(worst <= 1e-12, || format!("max |m0 - oracle| = {worst:e}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("max |m0 - oracle| = {worst:.1e}"))
}

fn critical(solver: &Solver, alpha: f64, gamma: f64) -> Result<CriticalOverlap, String> {
    let params = TheoryParams::new(alpha, gamma, 4, 0).map_err(|e| e.to_string())?;
    solver.critical_overlap(&params, Mode::Awm).map_err(|e| e.to_string())
}

fn c2_critical_intervals() -> Outcome {
    let start = Instant::now();
    let solver = Solver::default();
    let a = critical(&solver, 0.08, 1.0)?.value();
    let b = critical(&solver, 0.12, 1.0)?.value();
    check(a.is_some_and(|m| m > 0.15 && m < 0.30), || format!("m_c(0.08) = {a:?}"))?;
    check(b.is_some_and(|m| m > 0.25 && m < 0.45), || format!("m_c(0.12) = {b:?}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!("m_c(0.08) = {:.4}, m_c(0.12) = {:.4}", a.unwrap(), b.unwrap()))
}

fn c3_theory_simulation() -> Outcome {
    let start = Instant::now();
    let sizes = Sizes { n: 2000, k: 2000, p: 160 };
    let cfg = ExperimentConfig {
        trials: 20,
        t_max: 20,
        order: 4,
        m_grid: vec![0.4, 0.6, 0.9],
        ..ExperimentConfig::new(sizes, Seed(2024))
    };
    let solver = Solver::default();
    let points = overlap_evolution(&cfg, &solver).map_err(|e| e.to_string())?;
    let mut worst_early = 0.0f64;
    let mut worst_final = 0.0f64;
    for p in &points {
        // Index 0 is t = -1.
        for i in 0..=11 {
            let d = (p.summary.mean[i] - p.theory[i]).abs();
            worst_early = worst_early.max(d);
            check(d <= 0.05, || format!("m*={} t={}: sim {} theory {}", p.m_star, i as i64 - 1, p.summary.mean[i], p.theory[i]))?;
        }
        let last = p.theory.len() - 1;
        if p.theory[last] >= solver.config().success_threshold {
            let d = (p.summary.mean[last] - p.theory[last]).abs();
            worst_final = worst_final.max(d);
            check(d <= 0.02, || format!("m*={} t=20: sim {} theory {}", p.m_star, p.summary.mean[last], p.theory[last]))?;
        }
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!("max dev t<=10: {worst_early:.4}, t=20: {worst_final:.4}"))
}

fn c4_engine_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = Seed(4).rng(0);
    for case in 0..1000 {
        let n = rng.random_range(1..=512);
        let k = rng.random_range(1..=512);
        let p = rng.random_range(1..=32);
        let store = PatternStore::random(p, k, n, &mut rng).map_err(|e| e.to_string())?;
        let dense = DenseEngine::train(&store).map_err(|e| e.to_string())?;
        let y = random_bipolar_with(k, &mut rng).map_err(|e| e.to_string())?;
        let x = random_bipolar_with(n, &mut rng).map_err(|e| e.to_string())?;
        let h_dense = dense.hetero(&y).map_err(|e| e.to_string())?;
        let h_space = pattern_space_hetero(&store, &y).map_err(|e| e.to_string())?;
        check(h_dense == h_space, || format!("hetero differs in case {case} (N={n} K={k} P={p})"))?;
        let a_dense = dense.auto_step(&x).map_err(|e| e.to_string())?;
        let a_space = pattern_space_auto(&store, &x).map_err(|e| e.to_string())?;
        check(a_dense == a_space, || format!("auto differs in case {case} (N={n} K={k} P={p})"))?;
        let opts = RecallOptions { t_max: 5, record_states: true };
        let ta = awm_recall(&dense, &y, opts, None).map_err(|e| e.to_string())?;
        let tb = awm_recall(&store, &y, opts, None).map_err(|e| e.to_string())?;
        check(ta == tb, || format!("recall trace differs in case {case}"))?;
    }
    within(Duration::from_secs(60), start)?;
    Ok("1000 instances identical".into())
}

fn c5_brute_force() -> Outcome {
    let mut rng = Seed(5).rng(0);
    for case in 0..100 {
        let n = rng.random_range(1..=40);
        let k = rng.random_range(1..=40);
        let p = rng.random_range(1..=12);
        let store = PatternStore::random(p, k, n, &mut rng).map_err(|e| e.to_string())?;
        let hetero = train_hetero(&store).map_err(|e| e.to_string())?;
        let auto = train_auto(&store).map_err(|e| e.to_string())?;
        let xi = store.associates();
        let eta = store.keys();
        for i in 0..n {
            for kk in 0..k {
                let w: i64 = (0..p).map(|mu| i64::from(xi[mu].get(i)) * i64::from(eta[mu].get(kk))).sum();
                check(i64::from(hetero.get(i, kk)) == w, || format!("W[{i},{kk}] case {case}"))?;
            }
            for j in 0..n {
                let w: i64 = (0..p).map(|mu| i64::from(xi[mu].get(i)) * i64::from(xi[mu].get(j))).sum();
                check(i64::from(auto.get(i, j)) == w, || format!("J[{i},{j}] case {case}"))?;
            }
        }
        let x = random_bipolar_with(n, &mut rng).map_err(|e| e.to_string())?;
        let got = auto.step(&x).map_err(|e| e.to_string())?;
        for i in 0..n {
            let h: i64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| i64::from(auto.get(i, j)) * i64::from(x.get(j)))
                .sum();
            let want = if h >= 0 { 1 } else { -1 };
            check(got.get(i) == want, || format!("auto_step bit {i} case {case}"))?;
        }
    }
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let img = GrayImage::from_fn(16, 16, |_, _| rng.random_range(-200.0..300.0)).map_err(|e| e.to_string())?;
        let c = dct2d(&img).map_err(|e| e.to_string())?;
        let w = |k: usize| if k == 0 { (1.0f64 / 16.0).sqrt() } else { (2.0f64 / 16.0).sqrt() };
        for u in 0..16 {
            for v in 0..16 {
                let mut s = 0.0;
                for y in 0..16 {
                    for x in 0..16 {
                        s += img.get(y, x)
                            * (PI * (2 * y + 1) as f64 * u as f64 / 32.0).cos()
                            * (PI * (2 * x + 1) as f64 * v as f64 / 32.0).cos();
                    }
                }
                let d = (c.get(u, v) - w(u) * w(v) * s).abs();
                worst = worst.max(d);
                check(d <= 1e-9, || format!("dct ({u},{v}) trial {trial}: {d:e}"))?;
            }
        }
    }
    Ok(format!("weights, auto_step and dct2d agree (dct max err {worst:.1e})"))
}

fn c6_zero_watermark() -> Outcome {
    let mut rng = Seed(6).rng(0);
    for case in 0..1000 {
        let k = rng.random_range(1..=600);
        let feature = random_bipolar_with(k, &mut rng).map_err(|e| e.to_string())?;
        let wm = random_bipolar_with(k, &mut rng).map_err(|e| e.to_string())?;
        let key = zw_map(&feature, &wm).map_err(|e| e.to_string())?;
        let back = zw_extract(&feature, &key).map_err(|e| e.to_string())?;
        check(back == wm, || format!("involution fails in case {case}"))?;
        let f = rng.random_range(0..=k);
        let flipped = feature.with_flips(sample(&mut rng, k, f).iter());
        let out = zw_extract(&flipped, &key).map_err(|e| e.to_string())?;
        let ber = out.bit_error_rate(&wm).map_err(|e| e.to_string())?;
        check(ber == f as f64 / k as f64, || format!("case {case}: BER {ber} with {f}/{k} flips"))?;
    }
    Ok("1000 pairs exact".into())
}

fn c7_q_identities() -> Outcome {
    let solver = Solver::default();
    let mut worst_diag = 0.0f64;
    for &(alpha, m) in &[(0.05, 0.3), (0.08, 0.9), (0.12, 0.5), (0.2, 0.7)] {
        let params = TheoryParams::new(alpha, 1.0, 4, 15).map_err(|e| e.to_string())?;
        for mode in [Mode::Awm, Mode::Amm] {
            let st = solver.trajectory(&params, m, mode).map_err(|e| e.to_string())?;
            for t in st.first_time()..=st.last_time() {
                let q = st.q(t, t).ok_or("missing q_tt")?;
                worst_diag = worst_diag.max((q - 1.0).abs());
            }
        }
    }
    check(worst_diag == 0.0, || format!("q_tt deviates by {worst_diag:e}"))?;
    let rule = CorrelationRule::default();
    let double = CorrelationRule::new(2 * rule.len()).map_err(|e| e.to_string())?;
    let mut worst_fact = 0.0f64;
    let mut worst_nodes = 0.0f64;
    for i in 0..21 {
        let u = -3.0 + 0.3 * i as f64;
        for j in 0..21 {
            let v = -2.5 + 0.27 * j as f64;
            let q0 = q_integral(u, v, 0.0, &rule).map_err(|e| e.to_string())?;
            let prod = erf_oracle(u / SQRT_2) * erf_oracle(v / SQRT_2);
            worst_fact = worst_fact.max((q0 - prod).abs());
            for &rho in &[0.1, 0.4, 0.69, 0.71, 0.9, 0.99, 0.9999, 1.0] {
                let a = q_integral(u, v, rho, &rule).map_err(|e| e.to_string())?;
                let b = q_integral(u, v, rho, &double).map_err(|e| e.to_string())?;
                worst_nodes = worst_nodes.max((a - b).abs());
            }
        }
    }
    check(worst_fact < 1e-9, || format!("factorization error {worst_fact:e}"))?;
    check(worst_nodes < 1e-9, || format!("node doubling changes q by {worst_nodes:e}"))?;
    Ok(format!("q_tt = 1, factorization {worst_fact:.1e}, node doubling {worst_nodes:.1e}"))
}

fn c8_capacity() -> Outcome {
    let start = Instant::now();
    let solver = Solver::default();
    let c1 = solver.storage_capacity(1.0, 1, Mode::Amm).map_err(|e| e.to_string())?;
    let c4 = solver.storage_capacity(1.0, 4, Mode::Amm).map_err(|e| e.to_string())?;
    check(c4 < c1, || format!("alpha_c(4) = {c4} not below alpha_c(1) = {c1}"))?;
    check((c1 - 0.16).abs() <= 0.01, || format!("alpha_c(1) = {c1}"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!("alpha_c(1) = {c1:.4}, alpha_c(4) = {c4:.4}"))
}

fn c9_gamma_basin() -> Outcome {
    let solver = Solver::default();
    let mut report = Vec::new();
    for i in 1..=6 {
        let alpha = 0.02 * i as f64;
        let low = critical(&solver, alpha, 0.5)?;
        let high = critical(&solver, alpha, 1.0)?;
        let ok = match (low, high) {
            (CriticalOverlap::NoRecall, _) => true,
            (CriticalOverlap::Recall(_), CriticalOverlap::NoRecall) => false,
            (CriticalOverlap::Recall(a), CriticalOverlap::Recall(b)) => a >= b,
        };
        check(ok, || format!("alpha={alpha}: gamma=0.5 {low:?} vs gamma=1 {high:?}"))?;
        report.push(format!("{alpha:.2}:{:.3}/{:.3}", low.value().unwrap_or(f64::NAN), high.value().unwrap_or(f64::NAN)));
    }
    Ok(format!("m_c(0.5)/m_c(1.0) {}", report.join(" ")))
}

fn c10_ber_properties() -> Outcome {
    let start = Instant::now();
    let images = synthetic(12, 256, 256, Seed(10)).map_err(|e| e.to_string())?;
    let cfg = BerConfig {
        n: 2000,
        k: 2000,
        alpha: "0.12".parse().map_err(|e: awm_harness::HarnessError| e.to_string())?,
        t_max: 20,
        order: 4,
        seed: Seed(10),
        attack: Attack::Jpeg(JpegParams::new(5).map_err(|e| e.to_string())?),
    };
    let solver = Solver::default();
    let m_c = critical(&solver, 0.12, 1.0)?.value().ok_or("no recall at alpha = 0.12")?;
    let rows = ber_experiment(&cfg, &images, &solver).map_err(|e| e.to_string())?;
    let eligible: Vec<_> = rows.iter().filter(|r| r.m_star > m_c + 0.05).collect();
    check(!eligible.is_empty(), || "no image above m_c + 0.05".into())?;
    let mut failures = Vec::new();
    let mut bad_images = 0;
    for r in &eligible {
        let before = failures.len();
        // (1 - m_*)/2 in exact arithmetic: m_* K = K - 2f and BER K = f.
        let f = r.feature_flips;
        let m_counts = (r.m_star * cfg.k as f64).round() as i64;
        let exact_zero = r.zero_errors == Some(f) && m_counts == cfg.k as i64 - 2 * f as i64;
        if !exact_zero {
            failures.push(format!("{}: ber_zero {:?} != (1 - m_*)/2 with m_* = {}", r.image, r.ber_zero, r.m_star));
        }
        if r.ber_hmm > r.ber_zero.unwrap_or(f64::NAN) {
            failures.push(format!("{}: ber_hmm {} > ber_zero {:?}", r.image, r.ber_hmm, r.ber_zero));
        }
        if r.awm_errors != 0 {
            failures.push(format!("{}: ber_awm = {} ({} bits, theory {:.4})", r.image, r.ber_awm, r.awm_errors, r.theory_awm));
        }
        bad_images += usize::from(failures.len() > before);
    }
    within(Duration::from_secs(600), start)?;
    check(failures.is_empty(), || {
        format!("{bad_images} of {} eligible images violate: {}", eligible.len(), failures.join("; "))
    })?;
    Ok(format!("{} eligible images (m_c = {m_c:.4})", eligible.len()))
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

fn c11_determinism() -> Outcome {
    let solver = Solver::default();
    let evolution = ExperimentConfig {
        trials: 8,
        m_grid: vec![0.2, 0.5, 0.9],
        ..ExperimentConfig::new(Sizes { n: 1000, k: 800, p: 60 }, Seed(11))
    };
    let basin = ExperimentConfig {
        trials: 4,
        alpha_grid: vec!["0.04".parse().unwrap(), "0.1".parse().unwrap()],
        ..ExperimentConfig::new(Sizes { n: 500, k: 500, p: 0 }, Seed(11))
    };
    let images = synthetic(4, 64, 64, Seed(11)).map_err(|e| e.to_string())?;
    let ber = BerConfig {
        n: 1000,
        k: 1000,
        alpha: "0.02".parse().unwrap(),
        t_max: 20,
        order: 4,
        seed: Seed(11),
        attack: Attack::Noise { mean: 0.0, std: 50.0, clamp: false },
    };
    let run = |threads: usize| -> Result<Vec<String>, String> {
        pool(threads).install(|| {
            Ok(vec![
                evolution_csv(&overlap_evolution(&evolution, &solver).map_err(|e| e.to_string())?),
                basin_csv(&simulated_basin(&basin, &solver).map_err(|e| e.to_string())?),
                ber_csv(&ber_experiment(&ber, &images, &solver).map_err(|e| e.to_string())?),
            ])
        })
    };
    let a = run(1)?;
    let b = run(4)?;
    let c = run(4)?;
    check(a == b && b == c, || "library CSV differs between runs".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cli = |threads: &str, name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        std::env::set_var("AWM_THREADS", threads);
        let code = awm_harness::cli::run([
            "awm", "simulate", "evolution", "--n", "600", "--alpha", "0.05", "--trials", "6", "--t-max", "8",
            "--seed", "77", "--out", out.to_str().ok_or("temp path")?,
        ]);
        std::env::remove_var("AWM_THREADS");
        check(code == 0, || format!("CLI exit code {code}"))?;
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let x = cli("1", "x.csv")?;
    let y = cli("3", "y.csv")?;
    check(!x.is_empty() && x == y, || "CLI output differs between runs".into())?;
    Ok("evolution, basin, BER and CLI output byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("theory closed forms", c1_closed_forms),
        ("critical-overlap intervals", c2_critical_intervals),
        ("theory-simulation agreement", c3_theory_simulation),
        ("engine equivalence", c4_engine_equivalence),
        ("brute-force oracles", c5_brute_force),
        ("zero-watermark involution", c6_zero_watermark),
        ("q-integral identities", c7_q_identities),
        ("capacity ordering", c8_capacity),
        ("basin gamma-dependence", c9_gamma_basin),
        ("BER experiment properties", c10_ber_properties),
        ("full determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{took:.2?}]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{took:.2?}]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
