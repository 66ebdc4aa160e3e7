//! Penalty selection: BIC along a path and the closed-form heuristic.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgmError};
use crate::graph::DirectedGraph;
use crate::model::EdgeCovariates;
use crate::solver::{fit, lambda_max, log_grid, path, FitConfig, FitResult, PathResult};

/// `2 * NLL + |support| * log N` for a converged fit.
pub fn bic(fit: &FitResult, n_pairs: usize) -> Result<f64> {
    if !fit.converged {
        return Err(SrgmError::NotConverged {
            kkt: fit.kkt_residual,
            iters: fit.iters,
        });
    }
    Ok(2.0 * fit.nll + fit.s_hat as f64 * (n_pairs as f64).ln())
}

/// Index of the BIC minimizer on a path; ties go to the larger penalty.
pub fn select_bic_index(path: &PathResult, n_pairs: usize) -> Result<usize> {
    if path.fits.is_empty() {
        return Err(SrgmError::EmptyPath);
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, f) in path.fits.iter().enumerate() {
        let v = bic(f, n_pairs).map_err(|e| SrgmError::Path {
            index: k,
            lambda: f.lambda,
            source: Box::new(e),
        })?;
        let better = match best {
            None => true,
            Some((b, bv)) => v < bv || (v == bv && f.lambda > path.fits[b].lambda),
        };
        if better {
            best = Some((k, v));
        }
    }
    Ok(best.expect("nonempty path").0)
}

pub fn select_bic(path: &PathResult, n_pairs: usize) -> Result<(f64, &FitResult)> {
    let k = select_bic_index(path, n_pairs)?;
    Ok((path.lambdas[k], &path.fits[k]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicInputs {
    pub n: usize,
    pub p: usize,
    /// Covariate bound, the largest observed `|Z|`.
    pub c: f64,
    /// Confidence parameter, 3 by default.
    pub t: f64,
}

impl HeuristicInputs {
    pub fn new(n: usize, p: usize, c: f64) -> Self {
        HeuristicInputs { n, p, c, t: 3.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.c >= 0.0) || !(self.t > 0.0) {
            return Err(SrgmError::InvalidInput(format!(
                "heuristic needs n >= 2, c >= 0 and t > 0 (got n={}, c={}, t={})",
                self.n, self.c, self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicLambda {
    pub a_n: f64,
    pub lambda0: f64,
    /// Original-scale penalty: `lambda0 / sqrt(n)`, or `8 lambda0 / sqrt(n)` in strict mode.
    pub lambda: f64,
}

pub fn heuristic_lambda(h: &HeuristicInputs, strict_factor_8: bool) -> Result<HeuristicLambda> {
    h.validate()?;
    let n = h.n as f64;
    let p = h.p as f64;
    let big_n = n * (n - 1.0);
    let c1 = h.c.max(1.0);
    let a_n = (2.0 * (2.0 * (2.0 * n + p + 1.0)).ln() / big_n).sqrt() * c1;
    let lambda0 = 8.0 * a_n
        + 2.0 * ((h.t / big_n) * (11.0 * (h.c * h.c * p).max(1.0) + 16.0 * c1 * n.sqrt() * a_n)).sqrt()
        + 4.0 * h.t * c1 * n.sqrt() / (3.0 * big_n);
    let factor = if strict_factor_8 { 8.0 } else { 1.0 };
    Ok(HeuristicLambda {
        a_n,
        lambda0,
        lambda: factor * lambda0 / n.sqrt(),
    })
}

/// Largest absolute covariate value. Without covariates this is 1, with a note,
/// so the `max(1, c)` terms of the heuristic are unaffected.
pub fn choose_c_bound(z: &EdgeCovariates) -> (f64, Option<String>) {
    if z.p() == 0 {
        (
            1.0,
            Some("no covariates: covariate bound set to 1".to_string()),
        )
    } else {
        (z.c_bound(), None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tuning {
    Bic,
    Heuristic,
}

impl Tuning {
    pub fn as_str(self) -> &'static str {
        match self {
            Tuning::Bic => "bic",
            Tuning::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOptions {
    pub path_points: usize,
    /// The BIC path runs from `lambda_max` down to `lambda_max / path_ratio`.
    pub path_ratio: f64,
    pub t: f64,
    pub strict_factor_8: bool,
    /// Solver settings; `lambda` is ignored.
    pub solver: FitConfig,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            path_points: 50,
            path_ratio: 200.0,
            t: 3.0,
            strict_factor_8: false,
            solver: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TunedFit {
    pub fit: FitResult,
    pub lambda_max: f64,
    pub heuristic: Option<HeuristicLambda>,
    pub notes: Vec<String>,
}

/// Selects the penalty by `tuning` and returns the fit there. Both rules
/// start from the null fit; BIC fails if any path point fails to converge,
/// while a non-converged heuristic fit is returned flagged.
pub fn tune_and_fit(
    tuning: Tuning,
    g: &DirectedGraph,
    z: &EdgeCovariates,
    opts: &TuneOptions,
) -> Result<TunedFit> {
    let (lmax, null) = lambda_max(g, z, &opts.solver)?;
    match tuning {
        Tuning::Bic => {
            let grid = log_grid(lmax, opts.path_ratio, opts.path_points);
            let p = path(g, z, &grid, &opts.solver, Some(&null.theta_hat))?;
            let (_, best) = select_bic(&p, z.num_pairs())?;
            Ok(TunedFit {
                fit: best.clone(),
                lambda_max: lmax,
                heuristic: None,
                notes: Vec::new(),
            })
        }
        Tuning::Heuristic => {
            let (c, note) = choose_c_bound(z);
            let h = HeuristicInputs {
                t: opts.t,
                ..HeuristicInputs::new(g.n(), z.p(), c)
            };
            let hl = heuristic_lambda(&h, opts.strict_factor_8)?;
            let cfg = FitConfig {
                lambda: hl.lambda,
                ..opts.solver.clone()
            };
            let f = fit(g, z, &cfg, Some(&null.theta_hat))?;
            let mut notes: Vec<String> = note.into_iter().collect();
            if hl.lambda >= lmax {
                notes.push(format!(
                    "heuristic lambda {:.6} is at or above lambda_max {:.6}: empty support",
                    hl.lambda, lmax
                ));
            }
            Ok(TunedFit {
                fit: f,
                lambda_max: lmax,
                heuristic: Some(hl),
                notes,
            })
        }
    }
}
