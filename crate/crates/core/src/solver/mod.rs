//! Penalized likelihood fits, regularization paths and KKT verification.
//!
//! The objective is `NLL(theta) / N + lambda * (|alpha|_1 + |beta|_1)` over
//! `alpha, beta >= 0`. On the nonnegative orthant the l1 term is linear, so
//! its proximal map is a shifted projection.

mod prox;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgmError};
use crate::graph::DirectedGraph;
use crate::model::{EdgeCovariates, Likelihood, Theta};
use prox::{Coord, Problem, Settings, Smooth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub tol_obj: f64,
    pub tol_kkt: f64,
    pub active_eps: f64,
    pub accel: bool,
    /// Diagonal step scaling by per-coordinate curvature bounds.
    pub precondition: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 0.0,
            max_iters: 50_000,
            tol_obj: 1e-10,
            tol_kkt: 1e-6,
            active_eps: 1e-8,
            accel: true,
            precondition: true,
        }
    }
}

impl FitConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        FitConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SrgmError::InvalidInput(format!(
                "lambda must be finite and nonnegative (got {})",
                self.lambda
            )));
        }
        if !(self.tol_obj > 0.0 && self.tol_kkt > 0.0 && self.active_eps > 0.0) {
            return Err(SrgmError::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(SrgmError::InvalidInput("max_iters must be positive".into()));
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings {
            max_iters: self.max_iters,
            tol_obj: self.tol_obj,
            tol_kkt: self.tol_kkt,
            accel: self.accel,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Theta,
    pub lambda: f64,
    /// Indices in `0..2n` (alpha first, then beta) above `active_eps`.
    pub support: Vec<usize>,
    pub s_hat: usize,
    /// `NLL / N + lambda * |vartheta|_1`.
    pub objective: f64,
    /// Unscaled negative log-likelihood at `theta_hat`.
    pub nll: f64,
    pub kkt_residual: f64,
    pub iters: usize,
    pub converged: bool,
    /// Objective after each accepted iteration, starting value first.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub fits: Vec<FitResult>,
}

/// `NLL / N`, optionally in the rescaled coordinates `vartheta / sqrt(n)`.
struct Loss<'a> {
    lik: &'a Likelihood<'a>,
    inv_pairs: f64,
    theta_scale: f64,
}

impl Smooth for Loss<'_> {
    fn dim(&self) -> usize {
        self.lik.dim()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n2 = 2 * self.lik.n();
        let v = if self.theta_scale == 1.0 {
            self.lik.value_grad(x, grad)
        } else {
            let mut xs = x.to_vec();
            xs[..n2].iter_mut().for_each(|v| *v *= self.theta_scale);
            let v = self.lik.value_grad(&xs, grad);
            grad[..n2].iter_mut().for_each(|g| *g *= self.theta_scale);
            v
        };
        grad.iter_mut().for_each(|g| *g *= self.inv_pairs);
        v * self.inv_pairs
    }
}

fn check_dims(g: &DirectedGraph, z: &EdgeCovariates) -> Result<()> {
    if g.n() != z.n() {
        return Err(SrgmError::DimensionMismatch {
            what: "covariate node count",
            expected: g.n(),
            found: z.n(),
        });
    }
    if g.n() < 2 {
        return Err(SrgmError::InvalidInput("at least two nodes are required".into()));
    }
    Ok(())
}

/// Curvature-based step scaling for `NLL / N` in original coordinates.
fn metric(z: &EdgeCovariates, theta_scale: f64, precondition: bool) -> Vec<f64> {
    let (n, p) = (z.n(), z.p());
    if !precondition {
        return vec![1.0; 2 * n + 1 + p];
    }
    let pairs = z.num_pairs() as f64;
    // Curvature of NLL/N along alpha_i is at most (n-1)/(4N) = 1/(4n);
    // rescaling vartheta by sqrt(n) multiplies it by n.
    let theta_metric = 4.0 * n as f64 / (theta_scale * theta_scale);
    let mut m = vec![theta_metric; 2 * n];
    m.push(4.0);
    let mut sq = vec![0.0; p];
    for k in 0..z.num_pairs() {
        for (s, v) in sq.iter_mut().zip(z.row(k)) {
            *s += v * v;
        }
    }
    m.extend(sq.iter().map(|&s| if s > 0.0 { 4.0 * pairs / s } else { 4.0 }));
    m
}

fn run(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    cfg: &FitConfig,
    lambda: f64,
    theta_scale: f64,
    free: Option<&[bool]>,
    warm: Option<&Theta>,
) -> Result<FitResult> {
    cfg.validate()?;
    check_dims(g, z)?;
    let (n, p) = (g.n(), z.p());
    let lik = Likelihood::new(g, z)?;
    let loss = Loss {
        lik: &lik,
        inv_pairs: 1.0 / lik.num_pairs() as f64,
        theta_scale,
    };
    let coords: Vec<Coord> = (0..2 * n + 1 + p)
        .map(|k| {
            if k >= 2 * n {
                Coord::Free
            } else if free.is_some_and(|f| !f[k]) {
                Coord::Fixed
            } else {
                Coord::NonNeg { weight: lambda * theta_scale }
            }
        })
        .collect();
    let mut kkt_scale = vec![theta_scale; 2 * n];
    kkt_scale.extend(std::iter::repeat_n(1.0, p + 1));
    let metric = metric(z, theta_scale, cfg.precondition);

    let mut x0 = match warm {
        Some(t) => {
            t.check_against(z)?;
            t.to_vec()
        }
        None => Theta::zeros(n, p).to_vec(),
    };
    if let Some(f) = free {
        for k in 0..2 * n {
            if !f[k] {
                x0[k] = 0.0;
            }
        }
    }
    x0[..2 * n].iter_mut().for_each(|v| *v /= theta_scale);

    let problem = Problem {
        f: &loss,
        coords: &coords,
        metric: &metric,
        kkt_scale: &kkt_scale,
    };
    let out = problem.solve(&x0, &cfg.settings())?;
    let mut x = out.x;
    x[..2 * n].iter_mut().for_each(|v| *v *= theta_scale);
    let theta_hat = Theta::from_slice(n, p, &x);
    let support = theta_hat.support(cfg.active_eps);
    Ok(FitResult {
        lambda,
        s_hat: support.len(),
        support,
        objective: out.objective,
        nll: out.smooth * lik.num_pairs() as f64,
        kkt_residual: out.kkt,
        iters: out.iters,
        converged: out.converged,
        trace: out.trace,
        theta_hat,
    })
}

/// Solves the penalized problem at `cfg.lambda`.
pub fn fit(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    cfg: &FitConfig,
    warm: Option<&Theta>,
) -> Result<FitResult> {
    run(g, z, cfg, cfg.lambda, 1.0, None, warm)
}

/// Solves the rescaled problem in `vartheta / sqrt(n)` with penalty
/// `lambda_bar` and maps the solution back; `cfg.lambda` is ignored.
/// The reported `lambda` is `lambda_bar / sqrt(n)`.
pub fn fit_rescaled(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    lambda_bar: f64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let s = (g.n() as f64).sqrt();
    let lambda = lambda_bar / s;
    let cfg = FitConfig { lambda, ..cfg.clone() };
    let mut r = run(g, z, &cfg, lambda, s, None, None)?;
    r.lambda = lambda;
    Ok(r)
}

/// Fit with heterogeneity parameters outside `free` (length `2n`) held at zero.
pub fn fit_restricted(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    cfg: &FitConfig,
    free: &[bool],
    warm: Option<&Theta>,
) -> Result<FitResult> {
    if free.len() != 2 * g.n() {
        return Err(SrgmError::DimensionMismatch {
            what: "free-coordinate mask",
            expected: 2 * g.n(),
            found: free.len(),
        });
    }
    run(g, z, cfg, cfg.lambda, 1.0, Some(free), warm)
}

/// Fit of the global parameters alone, every `alpha_i, beta_j` at zero.
pub fn fit_null(g: &DirectedGraph, z: &EdgeCovariates, cfg: &FitConfig) -> Result<FitResult> {
    let cfg = FitConfig { lambda: 0.0, ..cfg.clone() };
    fit_restricted(g, z, &cfg, &vec![false; 2 * g.n()], None)
}

/// Smallest penalty at which all heterogeneity parameters are zero,
/// `max_i max(0, -dNLL/dvartheta_i / N)` at the null fit, with that fit.
pub fn lambda_max(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    cfg: &FitConfig,
) -> Result<(f64, FitResult)> {
    let null = fit_null(g, z, cfg)?;
    let lik = Likelihood::new(g, z)?;
    let mut grad = vec![0.0; lik.dim()];
    lik.value_grad(&null.theta_hat.to_vec(), &mut grad);
    let pairs = lik.num_pairs() as f64;
    let lmax = grad[..2 * g.n()]
        .iter()
        .fold(0.0f64, |m, &v| m.max(-v / pairs));
    Ok((lmax, null))
}

/// `count` log-spaced penalties from `lmax` down to `lmax / ratio`.
pub fn log_grid(lmax: f64, ratio: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lmax];
    }
    let step = ratio.ln() / (count - 1) as f64;
    (0..count).map(|k| lmax * (-(k as f64) * step).exp()).collect()
}

/// Warm-started fits along a strictly decreasing grid.
pub fn path(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    lambdas: &[f64],
    cfg: &FitConfig,
    warm: Option<&Theta>,
) -> Result<PathResult> {
    if lambdas.is_empty() {
        return Err(SrgmError::EmptyPath);
    }
    if lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite()))
        || lambdas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(SrgmError::InvalidInput(
            "penalty grid must be strictly decreasing and nonnegative".into(),
        ));
    }
    let mut fits: Vec<FitResult> = Vec::with_capacity(lambdas.len());
    for (index, &lambda) in lambdas.iter().enumerate() {
        let start = fits.last().map(|f| &f.theta_hat).or(warm);
        let cfg = FitConfig { lambda, ..cfg.clone() };
        let f = fit(g, z, &cfg, start).map_err(|e| SrgmError::Path {
            index,
            lambda,
            source: Box::new(e),
        })?;
        fits.push(f);
    }
    Ok(PathResult {
        lambdas: lambdas.to_vec(),
        fits,
    })
}

/// KKT residual of a fit, recomputed from the data in original coordinates.
pub fn kkt_check(fit: &FitResult, g: &DirectedGraph, z: &EdgeCovariates) -> Result<f64> {
    check_dims(g, z)?;
    fit.theta_hat.check_against(z)?;
    kkt_residual(&fit.theta_hat, fit.lambda, g, z)
}

pub fn kkt_residual(
    theta: &Theta,
    lambda: f64,
    g: &DirectedGraph,
    z: &EdgeCovariates,
) -> Result<f64> {
    let n = g.n();
    let lik = Likelihood::new(g, z)?;
    let x = theta.to_vec();
    let mut grad = vec![0.0; x.len()];
    lik.value_grad(&x, &mut grad);
    let pairs = lik.num_pairs() as f64;
    let mut r: f64 = 0.0;
    for (k, (&v, &gk)) in x.iter().zip(&grad).enumerate() {
        let gk = gk / pairs;
        let c = if k >= 2 * n {
            gk.abs()
        } else if v > 0.0 {
            (gk + lambda).abs()
        } else {
            (-gk - lambda).max(0.0)
        };
        r = r.max(c);
    }
    Ok(r)
}

/// Penalized objective at an arbitrary parameter.
pub fn objective(theta: &Theta, lambda: f64, g: &DirectedGraph, z: &EdgeCovariates) -> Result<f64> {
    theta.check_against(z)?;
    let lik = Likelihood::new(g, z)?;
    let l1: f64 = theta.alpha.iter().chain(&theta.beta).map(|v| v.abs()).sum();
    Ok(lik.value(&theta.to_vec()) / lik.num_pairs() as f64 + lambda * l1)
}
