//! Experiment configuration with exact size/ratio consistency.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use awm_core::patterns::Seed;

use crate::HarnessError;

/// Non-negative decimal number kept as an exact fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal {
    num: u128,
    den: u128,
    value: f64,
}

impl Decimal {
    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `self · n` when it is an integer.
    pub fn times(&self, n: usize) -> Option<usize> {
        // num and den are coprime, so den must divide n.
        let n = n as u128;
        if !n.is_multiple_of(self.den) {
            return None;
        }
        usize::try_from(self.num.checked_mul(n / self.den)?).ok()
    }

    /// Exact test of `self = a / b`.
    pub fn equals_ratio(&self, a: usize, b: usize) -> bool {
        if b == 0 {
            return false;
        }
        let (a, b) = (a as u128, b as u128);
        let g = gcd(a, b);
        self.num == a / g && self.den == b / g
    }
}

impl FromStr for Decimal {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("not a non-negative decimal: {s:?}"));
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
            || frac.len() > 30
        {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let num: u128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        let den = 10u128.pow(frac.len() as u32);
        let g = gcd(num, den);
        let value = s.parse().map_err(|_| bad())?;
        Ok(Decimal {
            num: num / g,
            den: den / g,
            value,
        })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Sizes as given by the user; any of `p`/`alpha` and `k`/`gamma` may be
/// omitted when the other determines it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SizeSpec {
    pub n: usize,
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub alpha: Option<Decimal>,
    pub gamma: Option<Decimal>,
}

/// Resolved sizes with `α = P/N`, `γ = K/N` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizes {
    pub n: usize,
    pub k: usize,
    pub p: usize,
}

impl Sizes {
    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    pub fn gamma(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

impl SizeSpec {
    /// K alone, defaulting to N.
    pub fn resolve_key_len(&self) -> Result<usize, HarnessError> {
        if self.n == 0 {
            return Err(HarnessError::Config("N must be positive".into()));
        }
        let k = resolve_one("K", "gamma", self.k, self.gamma, self.n)?.unwrap_or(self.n);
        if k == 0 {
            return Err(HarnessError::Config("K must be positive".into()));
        }
        Ok(k)
    }

    pub fn resolve(&self) -> Result<Sizes, HarnessError> {
        let n = self.n;
        let k = self.resolve_key_len()?;
        let p = resolve_one("P", "alpha", self.p, self.alpha, n)?
            .ok_or_else(|| HarnessError::Config("one of P or alpha is required".into()))?;
        if k == 0 || p == 0 {
            return Err(HarnessError::Config(format!("K = {k} and P = {p} must be positive")));
        }
        Ok(Sizes { n, k, p })
    }
}

fn resolve_one(
    size: &str,
    ratio: &str,
    given: Option<usize>,
    r: Option<Decimal>,
    n: usize,
) -> Result<Option<usize>, HarnessError> {
    match (given, r) {
        (Some(v), Some(r)) if !r.equals_ratio(v, n) => Err(HarnessError::Config(format!(
            "{ratio} = {r} disagrees with {size}/N = {v}/{n}"
        ))),
        (Some(v), _) => Ok(Some(v)),
        (None, Some(r)) => r.times(n).map(Some).ok_or_else(|| {
            HarnessError::Config(format!("{ratio} = {r} times N = {n} is not an integer"))
        }),
        (None, None) => Ok(None),
    }
}

/// Everything a simulation experiment needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sizes: Sizes,
    pub trials: usize,
    pub seed: Seed,
    pub t_max: usize,
    pub order: usize,
    /// Initial feature overlaps.
    pub m_grid: Vec<f64>,
    /// Loading rates for basin sweeps.
    pub alpha_grid: Vec<Decimal>,
}

impl ExperimentConfig {
    pub fn new(sizes: Sizes, seed: Seed) -> Self {
        ExperimentConfig {
            sizes,
            trials: 20,
            seed,
            t_max: 20,
            order: 4,
            m_grid: (1..=9).map(|i| f64::from(i) / 10.0).collect(),
            alpha_grid: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        if self.order == 0 {
            return Err(HarnessError::Config("order must be at least 1".into()));
        }
        if let Some(m) = self.m_grid.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(HarnessError::Config(format!("initial overlap {m} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Parses a comma-separated list.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, HarnessError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| HarnessError::Config(format!("bad list entry {t:?}")))
        })
        .collect()
}

/// Reads `key=value` lines; `#` starts a comment; blank lines are skipped.
/// Later duplicates replace earlier ones.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!("line {}: expected key=value", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(HarnessError::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}
