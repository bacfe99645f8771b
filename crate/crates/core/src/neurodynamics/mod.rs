//! Statistical neurodynamics of the two-layer recall.
//!
//! The macroscopic state of a synchronous recall is tracked through the
//! overlap `m_t`, the crosstalk-noise variance `σ_t²`, the noise
//! susceptibility `U_t`, the state correlations `q_{t,s} = E[x^t x^s]` and
//! the noise correlations `C_{t,s} = E[z_t z_s]`. The `n`-th order hierarchy
//! keeps noise correlations over `n - 1` past steps and drops them at lag `n`.
//!
//! Time indexing: in [`Mode::Awm`] the state starts at `t = -1`, the feature
//! layer, whose "signal" is `γ m_*` and whose noise variance is
//! `σ_*² = αγ`; the feature/watermark state correlation is zero
//! (`q_{t,-1} = 0` for `t ≥ 0`) while the noise propagated through the first
//! layer keeps its correlation `C_{t,-1} = σ_*² Π_{k=0}^{t} U_k`.
//! In [`Mode::Amm`] the state starts at `t = 0` with `σ_0² = α` and no
//! history before it.

pub mod quadrature;

use std::f64::consts::{PI, SQRT_2};

use libm::erf;

use crate::error::{Error, Result};

pub use quadrature::{CorrelationRule, GaussHermite, GaussLegendre, DEFAULT_NODES};

/// Which network the theory describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Hetero-associative layer followed by the auto-associative layer;
    /// the initial overlap is the feature overlap `m_*`.
    Awm,
    /// Auto-associative layer alone; the initial overlap is `m_0`.
    Amm,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Awm => "AWM",
            Mode::Amm => "AMM",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awm" => Ok(Mode::Awm),
            "amm" => Ok(Mode::Amm),
            _ => Err(Error::Format {
                format: "mode",
                reason: format!("unknown mode {s:?} (expected awm or amm)"),
            }),
        }
    }
}

/// Loading rate `α = P/N`, bit-length ratio `γ = K/N`, hierarchy order and
/// horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub alpha: f64,
    pub gamma: f64,
    pub order: usize,
    pub t_max: usize,
}

impl TheoryParams {
    pub fn new(alpha: f64, gamma: f64, order: usize, t_max: usize) -> Result<Self> {
        let params = TheoryParams {
            alpha,
            gamma,
            order,
            t_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::OutOfDomain {
                what: "alpha",
                value: self.alpha,
            });
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::OutOfDomain {
                what: "gamma",
                value: self.gamma,
            });
        }
        if self.order == 0 {
            return Err(Error::OutOfDomain {
                what: "order",
                value: 0.0,
            });
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        TheoryParams { alpha, ..self }
    }

    pub fn with_t_max(self, t_max: usize) -> Self {
        TheoryParams { t_max, ..self }
    }
}

fn check_overlap(m: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "initial overlap",
            value: m,
        })
    }
}

/// Overlap and susceptibility produced by a sign unit with signal `a` and
/// Gaussian noise of variance `var`.
fn sign_unit(a: f64, var: f64) -> (f64, f64) {
    let sd = var.sqrt();
    let m = erf(a / (SQRT_2 * sd));
    let u = (2.0 / PI).sqrt() / sd * (-a * a / (2.0 * var)).exp();
    (m, u)
}

/// Closed-form macroscopic state of the hetero-associative layer at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmStep {
    pub sigma_star_sq: f64,
    pub m0: f64,
    pub sigma0_sq: f64,
    pub u0: f64,
}

/// `σ_*² = αγ`, `m_0 = erf(γ m_* / (√2 σ_*))`,
/// `U_0 = √(2/(π σ_*²)) exp(-γ² m_*² / (2 σ_*²))`, `σ_0² = α + σ_*² U_0²`.
pub fn hmm_theory_step(params: &TheoryParams, m_star: f64) -> Result<HmmStep> {
    check_overlap(m_star)?;
    let sigma_star_sq = params.alpha * params.gamma;
    if !(sigma_star_sq > 0.0 && sigma_star_sq.is_finite()) {
        return Err(Error::SingularVariance);
    }
    let (m0, u0) = sign_unit(params.gamma * m_star, sigma_star_sq);
    Ok(HmmStep {
        sigma_star_sq,
        m0,
        sigma0_sq: params.alpha + sigma_star_sq * u0 * u0,
        u0,
    })
}

/// Correlation `E[sgn(u + X) sgn(v + Y)]` of two sign units whose unit-variance
/// Gaussian noises `X, Y` have correlation `rho ∈ [0, 1]`.
///
/// For `ρ ≤ 0.7` the noises are split as `X = d0 a + d1 c`,
/// `Y = d0 b + d1 c` with `d0 = √(1-ρ)`, `d1 = √ρ`; the `a` and `b` integrals
/// are error functions and the `c` integral uses Gauss–Hermite. For larger
/// `ρ` that integrand approaches a step and the rule loses accuracy, so the
/// bivariate-normal form
/// `erf(u/√2) erf(v/√2) + (2/π) ∫_0^{asin ρ} exp(-(u² - 2uv sinθ + v²) / (2cos²θ)) dθ`
/// is used instead, with Gauss–Legendre in `θ`. At `ρ = 1` the result is
/// `1 - |erf(u/√2) - erf(v/√2)|`.
pub fn q_integral(u: f64, v: f64, rho: f64, quad: &CorrelationRule) -> Result<f64> {
    if !(rho.is_finite() && (-RHO_SLACK..=1.0 + RHO_SLACK).contains(&rho)) {
        return Err(Error::InvariantViolation(format!(
            "noise correlation ratio {rho} outside [0, 1]"
        )));
    }
    let rho = rho.clamp(0.0, 1.0);
    if rho >= 1.0 {
        return Ok(1.0 - (erf(u / SQRT_2) - erf(v / SQRT_2)).abs());
    }
    if rho <= RHO_SWITCH {
        let d1 = rho.sqrt();
        let scale = SQRT_2 * (1.0 - rho).sqrt();
        return Ok(quad
            .hermite()
            .expect(|c| erf((u + d1 * c) / scale) * erf((v + d1 * c) / scale)));
    }
    let (uu, uv) = (u * u + v * v, 2.0 * u * v);
    let tail = quad.legendre().integrate(0.0, rho.asin(), |theta| {
        let (s, c) = theta.sin_cos();
        (-(uu - uv * s) / (2.0 * c * c)).exp()
    });
    Ok(erf(u / SQRT_2) * erf(v / SQRT_2) + 2.0 / PI * tail)
}

/// Tolerated rounding excess of the noise correlation ratio beyond `[0, 1]`.
pub const RHO_SLACK: f64 = 1e-9;

/// Correlation above which [`q_integral`] leaves the Gauss–Hermite route.
pub const RHO_SWITCH: f64 = 0.7;

/// Macroscopic state of one recall trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    params: TheoryParams,
    mode: Mode,
    origin: i64,
    m: Vec<f64>,
    /// Coefficient of ξ in the local field that produces the next state.
    signal: Vec<f64>,
    sigma2: Vec<f64>,
    u: Vec<f64>,
    /// Lower-triangular, indexed by `(t - origin, s - origin)` with `s ≤ t`.
    q: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
}

impl MacroState {
    /// State at the initial time: `t = -1` holding `m_*` for AWM, `t = 0`
    /// holding `m_0` for AMM.
    pub fn new(params: TheoryParams, initial: f64, mode: Mode) -> Result<Self> {
        params.validate()?;
        check_overlap(initial)?;
        let (origin, signal, sigma2) = match mode {
            Mode::Awm => {
                let var = params.alpha * params.gamma;
                if var.is_nan() || var <= 0.0 {
                    return Err(Error::SingularVariance);
                }
                (-1, params.gamma * initial, var)
            }
            Mode::Amm => (0, initial, params.alpha),
        };
        Ok(MacroState {
            params,
            mode,
            origin,
            m: vec![initial],
            signal: vec![signal],
            sigma2: vec![sigma2],
            u: vec![0.0],
            q: vec![vec![1.0]],
            c: vec![vec![sigma2]],
        })
    }

    pub fn params(&self) -> &TheoryParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn first_time(&self) -> i64 {
        self.origin
    }

    pub fn last_time(&self) -> i64 {
        self.origin + self.m.len() as i64 - 1
    }

    fn ix(&self, t: i64) -> usize {
        (t - self.origin) as usize
    }

    fn contains(&self, t: i64) -> bool {
        t >= self.origin && t <= self.last_time()
    }

    /// Overlap at time t (`m_*` at t = -1 in AWM mode).
    pub fn m(&self, t: i64) -> Option<f64> {
        self.contains(t).then(|| self.m[self.ix(t)])
    }

    /// Crosstalk variance at time t (`σ_*²` at t = -1).
    pub fn sigma2(&self, t: i64) -> Option<f64> {
        self.contains(t).then(|| self.sigma2[self.ix(t)])
    }

    /// Susceptibility `U_t`; undefined at the initial time of either mode.
    pub fn u(&self, t: i64) -> Option<f64> {
        let defined_from = match self.mode {
            Mode::Awm => 0,
            Mode::Amm => 1,
        };
        (t >= defined_from && self.contains(t)).then(|| self.u[self.ix(t)])
    }

    /// State correlation `q_{t,s}` (symmetric).
    pub fn q(&self, t: i64, s: i64) -> Option<f64> {
        (self.contains(t) && self.contains(s) && self.q.len() > self.ix(t.max(s)))
            .then(|| self.q_at(t, s))
    }

    /// Noise correlation `C_{t,s}` (symmetric); zero beyond the hierarchy lag.
    pub fn c(&self, t: i64, s: i64) -> Option<f64> {
        (self.contains(t) && self.contains(s) && self.c.len() > self.ix(t.max(s)))
            .then(|| self.c_at(t, s))
    }

    /// `(t, m_t)` for every computed time.
    pub fn overlaps(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.m
            .iter()
            .enumerate()
            .map(move |(i, &m)| (self.origin + i as i64, m))
    }

    pub fn final_overlap(&self) -> f64 {
        *self.m.last().expect("state is never empty")
    }

    fn q_at(&self, t: i64, s: i64) -> f64 {
        let (hi, lo) = if t >= s { (t, s) } else { (s, t) };
        self.q[self.ix(hi)][self.ix(lo)]
    }

    fn c_at(&self, t: i64, s: i64) -> f64 {
        let (hi, lo) = if t >= s { (t, s) } else { (s, t) };
        if lo < self.origin {
            return 0.0;
        }
        self.c[self.ix(hi)][self.ix(lo)]
    }

    /// Covariance of the fresh noise injected at times a and b: `α q_{a,b}`,
    /// or `σ_*² = αγ` for the feature layer with itself.
    fn noise_cov(&self, a: i64, b: i64) -> f64 {
        if a == -1 && b == -1 {
            self.params.alpha * self.params.gamma
        } else {
            self.params.alpha * self.q_at(a, b)
        }
    }

    /// `Π_{k=from}^{to} U_k`, 1 when empty.
    fn u_prod(&self, from: i64, to: i64) -> f64 {
        (from..=to).map(|k| self.u[self.ix(k)]).product()
    }
}

/// State correlation `q_{t+1,τ}` from a state populated through time t
/// (plus, optionally, t + 1).
pub fn q_correlation(state: &MacroState, t: i64, tau: i64, quad: &CorrelationRule) -> Result<f64> {
    if !state.contains(t) || tau > t + 1 || tau < state.origin {
        return Err(Error::Internal(format!("q_{{{},{tau}}} not computable", t + 1)));
    }
    if tau == t + 1 {
        return Ok(1.0);
    }
    if state.mode == Mode::Awm && tau == -1 {
        return Ok(0.0);
    }
    let sigma_t = state.sigma2[state.ix(t)].sqrt();
    let signal_t = state.signal[state.ix(t)];
    let lag = (t + 1 - tau) as usize;
    if lag >= state.params.order || tau - 1 < state.origin {
        let (m_next, _) = sign_unit(signal_t, sigma_t * sigma_t);
        return Ok(m_next * state.m[state.ix(tau)]);
    }
    let prev = tau - 1;
    let sigma_prev = state.sigma2[state.ix(prev)].sqrt();
    let rho = state.c_at(t, prev) / (sigma_t * sigma_prev);
    q_integral(
        signal_t / sigma_t,
        state.signal[state.ix(prev)] / sigma_prev,
        rho,
        quad,
    )
}

/// Noise correlation `C_{t,s}`, `s ≤ t`, by the three-case recursion of the
/// `n`-th order hierarchy (lag `L = t - s`):
///
/// * `L ≥ n`: 0;
/// * `L = n - 1`: `α q_{t,s} + U_t C_{t-1,s}`;
/// * `1 ≤ L ≤ n - 2`: `α q_{t,s} + U_t U_s C_{t-1,s-1}
///   + α Σ_{η=s-n+2}^{s-1} q_{t,η} Π_{k=η+1}^{s} U_k
///   + α Σ_{η=s-n+2}^{t-1} q_{η,s} Π_{k=η+1}^{t} U_k`;
/// * `L = 0`: `σ_t²`.
///
/// Needs `q_{t,·}` and `C_{t-1,·}`; sums are clipped at the initial time.
pub fn c_recursion(state: &MacroState, t: i64, s: i64) -> Result<f64> {
    if s > t || !state.contains(t) || state.q.len() <= state.ix(t) {
        return Err(Error::Internal(format!("C_{{{t},{s}}} not computable")));
    }
    if s < state.origin {
        return Ok(0.0);
    }
    let n = state.params.order as i64;
    let lag = t - s;
    if lag == 0 {
        return Ok(state.sigma2[state.ix(t)]);
    }
    if lag >= n {
        return Ok(0.0);
    }
    let u_t = state.u[state.ix(t)];
    let direct = state.noise_cov(t, s);
    if lag == n - 1 {
        return Ok(direct + u_t * state.c_at(t - 1, s));
    }
    let lo = (s - n + 2).max(state.origin);
    let carried = if s > state.origin {
        u_t * state.u[state.ix(s)] * state.c_at(t - 1, s - 1)
    } else {
        0.0
    };
    let older: f64 = (lo..s)
        .map(|eta| state.noise_cov(t, eta) * state.u_prod(eta + 1, s))
        .sum();
    let through: f64 = (lo..t)
        .map(|eta| state.noise_cov(eta, s) * state.u_prod(eta + 1, t))
        .sum();
    Ok(direct + carried + older + through)
}

/// Advances the state by one time step, appending `m`, `U`, `σ²` and the new
/// rows of the `q` and `C` tables.
pub fn amm_theory_step(state: &mut MacroState, quad: &CorrelationRule) -> Result<()> {
    let t = state.last_time();
    let var = state.sigma2[state.ix(t)];
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::NumericFailure(format!("sigma_{t}^2 = {var}")));
    }
    let (m_next, u_next) = sign_unit(state.signal[state.ix(t)], var);

    let q_row = (state.origin..=t + 1)
        .map(|tau| q_correlation(state, t, tau, quad))
        .collect::<Result<Vec<_>>>()?;

    state.m.push(m_next);
    state.signal.push(m_next);
    state.u.push(u_next);
    state.q.push(q_row);

    let alpha = state.params.alpha;
    let n = state.params.order as i64;
    let window: f64 = ((t - n + 1).max(state.origin)..=t)
        .map(|tau| state.q_at(t + 1, tau) * state.u_prod(tau + 1, t + 1))
        .sum();
    let var_next = alpha + u_next * u_next * var + 2.0 * alpha * window;
    if !(var_next > 0.0 && var_next.is_finite()) {
        return Err(Error::NumericFailure(format!(
            "sigma_{}^2 = {var_next}",
            t + 1
        )));
    }
    state.sigma2.push(var_next);

    let mut c_row = vec![0.0; state.m.len()];
    for s in (t + 2 - n).max(state.origin)..=t {
        c_row[state.ix(s)] = c_recursion(state, t + 1, s)?;
    }
    c_row[state.ix(t + 1)] = var_next;
    state.c.push(c_row);
    Ok(())
}

/// Overlap trajectory from `initial` (`m_*` for AWM, `m_0` for AMM) up to
/// `params.t_max`.
pub fn trajectory(
    params: &TheoryParams,
    initial: f64,
    mode: Mode,
    quad: &CorrelationRule,
) -> Result<MacroState> {
    let mut state = MacroState::new(*params, initial, mode)?;
    while state.last_time() < params.t_max as i64 {
        amm_theory_step(&mut state, quad)?;
    }
    Ok(state)
}

/// Thresholds and tolerances for the derived curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub nodes: usize,
    /// Recall counts as successful when the overlap reaches this value.
    pub success_threshold: f64,
    /// Horizon for the critical-overlap success test.
    pub critical_horizon: usize,
    /// Bisection resolution for the critical overlap.
    pub overlap_resolution: f64,
    /// Bisection resolution for the storage capacity.
    pub alpha_resolution: f64,
    pub fixed_point_tol: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nodes: DEFAULT_NODES,
            success_threshold: 0.95,
            critical_horizon: 50,
            overlap_resolution: 1e-3,
            alpha_resolution: 1e-4,
            fixed_point_tol: 1e-10,
            max_steps: 200,
        }
    }
}

/// Critical overlap, or the sentinel when even a perfect start fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalOverlap {
    Recall(f64),
    NoRecall,
}

impl CriticalOverlap {
    pub fn value(self) -> Option<f64> {
        match self {
            CriticalOverlap::Recall(m) => Some(m),
            CriticalOverlap::NoRecall => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub overlap: f64,
    pub steps: usize,
    /// False when `max_steps` passed without `|Δm|` dropping below tolerance.
    pub converged: bool,
}

/// Basin of attraction over a grid of loading rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinCurve {
    pub mode: Mode,
    pub alphas: Vec<f64>,
    pub m_critical: Vec<CriticalOverlap>,
    pub m_equilibrium: Vec<Equilibrium>,
}

/// Quadrature rule plus solver configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    quad: CorrelationRule,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default()).expect("default solver")
    }
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        Ok(Solver {
            quad: CorrelationRule::new(config.nodes)?,
            config,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn quadrature(&self) -> &CorrelationRule {
        &self.quad
    }

    pub fn trajectory(&self, params: &TheoryParams, initial: f64, mode: Mode) -> Result<MacroState> {
        trajectory(params, initial, mode, &self.quad)
    }

    fn recalls(&self, params: &TheoryParams, initial: f64, mode: Mode) -> Result<bool> {
        let horizon = params.with_t_max(self.config.critical_horizon);
        let state = self.trajectory(&horizon, initial, mode)?;
        Ok(state.final_overlap() >= self.config.success_threshold)
    }

    /// Smallest initial overlap that still recalls, by bisection on [0, 1].
    pub fn critical_overlap(&self, params: &TheoryParams, mode: Mode) -> Result<CriticalOverlap> {
        if !self.recalls(params, 1.0, mode)? {
            return Ok(CriticalOverlap::NoRecall);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > self.config.overlap_resolution {
            let mid = 0.5 * (lo + hi);
            if self.recalls(params, mid, mode)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(CriticalOverlap::Recall(0.5 * (lo + hi)))
    }

    /// Overlap reached from a perfect initial state.
    pub fn equilibrium_overlap(&self, params: &TheoryParams, mode: Mode) -> Result<Equilibrium> {
        let mut state = MacroState::new(*params, 1.0, mode)?;
        let mut prev = state.final_overlap();
        for step in 1..=self.config.max_steps {
            amm_theory_step(&mut state, &self.quad)?;
            let m = state.final_overlap();
            if (m - prev).abs() < self.config.fixed_point_tol {
                return Ok(Equilibrium {
                    overlap: m,
                    steps: step,
                    converged: true,
                });
            }
            prev = m;
        }
        Ok(Equilibrium {
            overlap: prev,
            steps: self.config.max_steps,
            converged: false,
        })
    }

    fn stable(&self, params: &TheoryParams, mode: Mode) -> Result<bool> {
        Ok(self.equilibrium_overlap(params, mode)?.overlap >= self.config.success_threshold)
    }

    /// Largest loading rate whose equilibrium overlap still reaches the
    /// success threshold, by bisection on α ∈ [10⁻³, 1].
    pub fn storage_capacity(&self, gamma: f64, order: usize, mode: Mode) -> Result<f64> {
        let base = TheoryParams::new(1e-3, gamma, order, 0)?;
        let (mut lo, mut hi) = (1e-3, 1.0);
        if !self.stable(&base, mode)? {
            return Ok(0.0);
        }
        if self.stable(&base.with_alpha(hi), mode)? {
            return Ok(hi);
        }
        while hi - lo > self.config.alpha_resolution {
            let mid = 0.5 * (lo + hi);
            if self.stable(&base.with_alpha(mid), mode)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Critical and equilibrium overlaps at each α.
    pub fn basin_curve(&self, alphas: &[f64], gamma: f64, order: usize, mode: Mode) -> Result<BasinCurve> {
        let mut m_critical = Vec::with_capacity(alphas.len());
        let mut m_equilibrium = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let params = TheoryParams::new(alpha, gamma, order, 0)?;
            m_critical.push(self.critical_overlap(&params, mode)?);
            m_equilibrium.push(self.equilibrium_overlap(&params, mode)?);
        }
        Ok(BasinCurve {
            mode,
            alphas: alphas.to_vec(),
            m_critical,
            m_equilibrium,
        })
    }
}
