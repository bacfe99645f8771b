//! Quadrature rules for the state-correlation integrals.
//!
//! Gauss–Hermite handles expectations under the standard normal measure
//! `Dc = exp(-c²/2) dc / √(2π)`. Gauss–Legendre on a finite interval is
//! used for the strongly correlated case, where the Gauss–Hermite
//! integrand becomes a near step function.
//!
//! Nodes are the roots of the physicists' Hermite polynomial H_n, found by
//! Newton iteration on the orthonormal three-term recurrence (stable for
//! large n, no factorial overflow). The physicists' rule
//! `∫ e^{-x²} f(x) dx ≈ Σ w_i f(x_i)` is rescaled to `c_i = √2 x_i`,
//! `p_i = w_i / √π` so that `Σ p_i g(c_i) ≈ ∫ Dc g(c)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default node count for the state-correlation integrals.
pub const DEFAULT_NODES: usize = 96;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLength {
                what: "quadrature rule",
                len: n,
            });
        }
        let (x, w) = physicists_rule(n)?;
        let nodes = x.iter().map(|x| x * std::f64::consts::SQRT_2).collect();
        let weights = w.iter().map(|w| w / PI.sqrt()).collect();
        Ok(GaussHermite { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in the standard-normal variable, descending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Probability weights, summing to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ Dc f(c)`.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| w * f(c))
            .sum()
    }
}

impl Default for GaussHermite {
    fn default() -> Self {
        GaussHermite::new(DEFAULT_NODES).expect("default Gauss-Hermite rule")
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        const MAX_ITER: usize = 100;
        if n == 0 {
            return Err(Error::InvalidLength {
                what: "quadrature rule",
                len: n,
            });
        }
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..MAX_ITER {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NumericFailure(format!(
                    "Legendre root {i} of {n} did not converge"
                )));
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f(x) dx`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Paired rules of equal order used by [`super::q_integral`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRule {
    hermite: GaussHermite,
    legendre: GaussLegendre,
}

impl CorrelationRule {
    pub fn new(n: usize) -> Result<Self> {
        Ok(CorrelationRule {
            hermite: GaussHermite::new(n)?,
            legendre: GaussLegendre::new(n)?,
        })
    }

    pub fn len(&self) -> usize {
        self.hermite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hermite.is_empty()
    }

    pub fn hermite(&self) -> &GaussHermite {
        &self.hermite
    }

    pub fn legendre(&self) -> &GaussLegendre {
        &self.legendre
    }
}

impl Default for CorrelationRule {
    fn default() -> Self {
        CorrelationRule::new(DEFAULT_NODES).expect("default correlation rule")
    }
}

/// Roots and weights for weight function e^{-x²}.
fn physicists_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const MAX_ITER: usize = 100;
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        // Initial guesses for the largest roots, then extrapolation from
        // the two previous roots.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NumericFailure(format!(
                "Hermite root {i} of {n} did not converge"
            )));
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}
