//! Parameters, link probabilities, likelihood and Gram-matrix assembly.
//!
//! Flat parameter vectors use the layout `[alpha (n), beta (n), mu, gamma (p)]`,
//! matching the column order of the design matrix.

mod covariates;
mod gram;
mod likelihood;

pub use covariates::{read_covariates, write_covariates, EdgeCovariates};
pub use gram::{gram_adjusted, GramMode};
pub use likelihood::Likelihood;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgmError};
use crate::graph::{num_pairs, DirectedGraph};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: f64,
    pub gamma: Vec<f64>,
}

impl Theta {
    pub fn zeros(n: usize, p: usize) -> Self {
        Theta {
            alpha: vec![0.0; n],
            beta: vec![0.0; n],
            mu: 0.0,
            gamma: vec![0.0; p],
        }
    }

    /// Validated constructor: equal-length, finite, nonnegative `alpha` and `beta`.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, mu: f64, gamma: Vec<f64>) -> Result<Self> {
        let theta = Theta {
            alpha,
            beta,
            mu,
            gamma,
        };
        theta.validate()?;
        Ok(theta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.beta.len() {
            return Err(SrgmError::DimensionMismatch {
                what: "beta",
                expected: self.alpha.len(),
                found: self.beta.len(),
            });
        }
        if self.alpha.len() < 2 {
            return Err(SrgmError::InvalidInput("at least two nodes are required".into()));
        }
        let all = self.to_vec();
        if all.iter().any(|x| !x.is_finite()) {
            return Err(SrgmError::InvalidInput("parameters must be finite".into()));
        }
        if let Some(x) = self.alpha.iter().chain(&self.beta).find(|&&x| x < 0.0) {
            return Err(SrgmError::InvalidInput(format!(
                "heterogeneity parameters must be nonnegative (found {x})"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n() + 1 + self.p()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.alpha);
        v.extend_from_slice(&self.beta);
        v.push(self.mu);
        v.extend_from_slice(&self.gamma);
        v
    }

    pub fn from_slice(n: usize, p: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), 2 * n + 1 + p, "flat parameter length");
        Theta {
            alpha: v[..n].to_vec(),
            beta: v[n..2 * n].to_vec(),
            mu: v[2 * n],
            gamma: v[2 * n + 1..].to_vec(),
        }
    }

    /// Heterogeneity parameters `(alpha, beta)` as one vector of length `2n`.
    pub fn vartheta(&self) -> Vec<f64> {
        self.alpha.iter().chain(&self.beta).copied().collect()
    }

    /// Indices in `0..2n` of heterogeneity parameters above `eps`.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        self.alpha
            .iter()
            .chain(&self.beta)
            .enumerate()
            .filter(|&(_, &x)| x > eps)
            .map(|(k, _)| k)
            .collect()
    }

    pub(crate) fn check_against(&self, z: &EdgeCovariates) -> Result<()> {
        if z.n() != self.n() {
            return Err(SrgmError::DimensionMismatch {
                what: "covariate node count",
                expected: self.n(),
                found: z.n(),
            });
        }
        if z.p() != self.p() {
            return Err(SrgmError::DimensionMismatch {
                what: "covariate dimension",
                expected: self.p(),
                found: z.p(),
            });
        }
        Ok(())
    }

    /// Linear predictor `alpha_i + beta_j + mu + gamma' Z_ij`.
    #[inline]
    pub fn predictor(&self, z: &EdgeCovariates, i: usize, j: usize) -> f64 {
        let zij = z.get(i, j);
        self.alpha[i] + self.beta[j] + self.mu + dot(&self.gamma, zij)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parameters in the rescaled coordinates `vartheta / sqrt(n)`, global part unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledTheta {
    pub n: usize,
    pub p: usize,
    pub theta_bar: Vec<f64>,
}

pub fn rescale(theta: &Theta) -> RescaledTheta {
    let n = theta.n();
    let s = (n as f64).sqrt();
    let mut v = theta.to_vec();
    for x in &mut v[..2 * n] {
        *x /= s;
    }
    RescaledTheta {
        n,
        p: theta.p(),
        theta_bar: v,
    }
}

pub fn unrescale(bar: &RescaledTheta) -> Theta {
    let n = bar.n;
    let s = (n as f64).sqrt();
    let mut v = bar.theta_bar.clone();
    for x in &mut v[..2 * n] {
        *x *= s;
    }
    Theta::from_slice(n, bar.p, &v)
}

/// Penalty on the rescaled problem, `sqrt(n) * lambda`.
pub fn rescale_lambda(lambda: f64, n: usize) -> f64 {
    (n as f64).sqrt() * lambda
}

/// Floor `rho_n` on link probabilities and the predictor cap `r_n = logit((1 - rho)/rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityProfile {
    pub rho_n: f64,
    pub r_n: f64,
}

impl SparsityProfile {
    pub fn from_rho(rho_n: f64) -> Result<Self> {
        if !(rho_n > 0.0 && rho_n <= 0.5) {
            return Err(SrgmError::InvalidProbability {
                what: "rho_n",
                value: rho_n,
            });
        }
        Ok(SparsityProfile {
            rho_n,
            r_n: ((1.0 - rho_n) / rho_n).ln(),
        })
    }

    /// Profile implied by the largest predictor magnitude of an instance.
    pub fn from_max_predictor(max_abs: f64) -> Self {
        SparsityProfile {
            rho_n: sigmoid(-max_abs),
            r_n: max_abs,
        }
    }
}

pub fn link_prob(theta: &Theta, z: &EdgeCovariates, i: usize, j: usize) -> Result<f64> {
    theta.check_against(z)?;
    if i == j {
        return Err(SrgmError::InvalidPair { i });
    }
    if i >= theta.n() || j >= theta.n() {
        return Err(SrgmError::InvalidInput(format!(
            "pair ({i},{j}) out of range for n = {}",
            theta.n()
        )));
    }
    Ok(sigmoid(theta.predictor(z, i, j)))
}

pub fn nll(theta: &Theta, g: &DirectedGraph, z: &EdgeCovariates) -> Result<f64> {
    theta.check_against(z)?;
    Ok(Likelihood::new(g, z)?.value(&theta.to_vec()))
}

/// Gradient of the negative log-likelihood in the flat layout.
pub fn nll_grad(theta: &Theta, g: &DirectedGraph, z: &EdgeCovariates) -> Result<Vec<f64>> {
    theta.check_against(z)?;
    let lik = Likelihood::new(g, z)?;
    let mut grad = vec![0.0; theta.dim()];
    lik.value_grad(&theta.to_vec(), &mut grad);
    Ok(grad)
}

/// Largest `|alpha_i + beta_j + mu + gamma' Z_ij|` over all ordered pairs.
pub fn max_predictor(theta: &Theta, z: &EdgeCovariates) -> Result<f64> {
    theta.check_against(z)?;
    let n = theta.n();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            m = m.max(theta.predictor(z, i, j).abs());
        }
    }
    Ok(m)
}

/// All link probabilities in the global edge order.
pub fn link_probs(theta: &Theta, z: &EdgeCovariates) -> Result<Vec<f64>> {
    theta.check_against(z)?;
    let n = theta.n();
    let mut out = Vec::with_capacity(num_pairs(n));
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            out.push(sigmoid(theta.predictor(z, i, j)));
        }
    }
    Ok(out)
}
