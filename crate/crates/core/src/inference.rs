//! Wald intervals for the global parameters `xi = (mu, gamma)`.
//!
//! The intervals are centred at the penalized estimate itself; no debiasing
//! step is applied. Standard errors come from the inverse of the weighted
//! Gram matrix of the `(1, Z)` columns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SrgmError};
use crate::graph::DirectedGraph;
use crate::model::{EdgeCovariates, Likelihood, Theta};
use crate::solver::{fit_restricted, FitConfig, FitResult};

/// Largest accepted condition number of the covariate Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub level: f64,
    /// Evaluate the weights at an unpenalized refit on the selected support
    /// instead of at the penalized estimate.
    pub refit_on_support: bool,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            level: 0.95,
            refit_on_support: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub level: f64,
    /// `(mu, gamma_1, ..., gamma_p)` at which the intervals are centred.
    pub estimate: Vec<f64>,
    pub se: Vec<f64>,
    /// `[lower, upper]` per coordinate of `xi`.
    pub ci: Vec<[f64; 2]>,
    pub sigma_xi: Vec<Vec<f64>>,
    pub theta_xi: Vec<Vec<f64>>,
    pub refit: bool,
}

impl InferenceReport {
    pub fn covers(&self, k: usize, value: f64) -> bool {
        self.ci[k][0] <= value && value <= self.ci[k][1]
    }

    pub fn ci_length(&self, k: usize) -> f64 {
        self.ci[k][1] - self.ci[k][0]
    }
}

/// `(1/N) sum_ij w_ij (1, Z_ij)(1, Z_ij)'` with `w = p (1 - p)` at `theta`.
pub fn sigma_xi(theta: &Theta, z: &EdgeCovariates) -> Result<Vec<Vec<f64>>> {
    theta.check_against(z)?;
    let p = z.p();
    let d = p + 1;
    let g = DirectedGraph::from_edges(z.n(), &[])?;
    let w = Likelihood::new(&g, z)?.weights(&theta.to_vec());
    let mut s = vec![vec![0.0; d]; d];
    let mut row = vec![1.0; d];
    for (k, &wk) in w.iter().enumerate() {
        row[1..].copy_from_slice(z.row(k));
        for a in 0..d {
            let wa = wk * row[a];
            for b in 0..=a {
                s[a][b] += wa * row[b];
            }
        }
    }
    let inv = 1.0 / w.len() as f64;
    for a in 0..d {
        for b in 0..=a {
            s[a][b] *= inv;
            s[b][a] = s[a][b];
        }
    }
    Ok(s)
}

/// Inverse of a symmetric positive definite matrix through its Cholesky
/// factor. A non-positive pivot or a condition number above
/// [`MAX_CONDITION`] is reported with the offending pivot index.
pub fn invert_sigma_xi(sigma: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = sigma.len();
    if d == 0 {
        return Err(SrgmError::InvalidInput("empty matrix".into()));
    }
    let mut scale: f64 = 0.0;
    for row in sigma {
        if row.len() != d {
            return Err(SrgmError::DimensionMismatch {
                what: "matrix row length",
                expected: d,
                found: row.len(),
            });
        }
        scale = row.iter().fold(scale, |m, v| m.max(v.abs()));
    }
    for a in 0..d {
        for b in 0..a {
            if (sigma[a][b] - sigma[b][a]).abs() > 1e-12 * scale.max(1.0) {
                return Err(SrgmError::InvalidInput(format!(
                    "matrix is not symmetric at ({a}, {b})"
                )));
            }
        }
    }

    let mut l = vec![vec![0.0; d]; d];
    let mut pivots = vec![0.0; d];
    for j in 0..d {
        let mut s = sigma[j][j];
        for k in 0..j {
            s -= l[j][k] * l[j][k];
        }
        if !(s > 0.0) {
            return Err(SrgmError::NotPositiveDefinite { pivot: j, value: s });
        }
        pivots[j] = s;
        let ljj = s.sqrt();
        l[j][j] = ljj;
        for i in j + 1..d {
            let mut s = sigma[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / ljj;
        }
    }

    let eig = DMatrix::from_fn(d, d, |a, b| sigma[a][b]).symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if cond > MAX_CONDITION {
        let pivot = (0..d)
            .min_by(|&a, &b| pivots[a].total_cmp(&pivots[b]))
            .unwrap_or(0);
        return Err(SrgmError::IllConditioned {
            pivot,
            cond,
            limit: MAX_CONDITION,
        });
    }

    let mut inv = vec![vec![0.0; d]; d];
    let mut y = vec![0.0; d];
    for c in 0..d {
        for i in 0..d {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        for i in (0..d).rev() {
            let mut s = y[i];
            for k in i + 1..d {
                s -= l[k][i] * inv[k][c];
            }
            inv[i][c] = s / l[i][i];
        }
    }
    for a in 0..d {
        for b in 0..a {
            let m = 0.5 * (inv[a][b] + inv[b][a]);
            inv[a][b] = m;
            inv[b][a] = m;
        }
    }
    Ok(inv)
}

/// Two-sided standard normal critical value for coverage `level`.
pub fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(SrgmError::InvalidInput(format!(
            "confidence level must lie in (0, 1) (got {level})"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf((1.0 + level) / 2.0))
}

/// Wald intervals `xi_hat_k +- z * sqrt(Theta_kk / N)` for a converged fit.
pub fn wald_ci(
    fit: &FitResult,
    g: &DirectedGraph,
    z: &EdgeCovariates,
    cfg: &InferenceConfig,
) -> Result<InferenceReport> {
    if !fit.converged {
        return Err(SrgmError::NotConverged {
            kkt: fit.kkt_residual,
            iters: fit.iters,
        });
    }
    let crit = critical_value(cfg.level)?;
    let weights_at = if cfg.refit_on_support {
        let n = g.n();
        let mut free = vec![false; 2 * n];
        for &k in &fit.support {
            free[k] = true;
        }
        let refit = fit_restricted(g, z, &FitConfig::with_lambda(0.0), &free, Some(&fit.theta_hat))?;
        if !refit.converged {
            return Err(SrgmError::NotConverged {
                kkt: refit.kkt_residual,
                iters: refit.iters,
            });
        }
        refit.theta_hat
    } else {
        fit.theta_hat.clone()
    };
    let sigma = sigma_xi(&weights_at, z)?;
    let theta_xi = invert_sigma_xi(&sigma)?;
    let pairs = z.num_pairs() as f64;
    let mut estimate = vec![fit.theta_hat.mu];
    estimate.extend_from_slice(&fit.theta_hat.gamma);
    let se: Vec<f64> = (0..estimate.len())
        .map(|k| (theta_xi[k][k] / pairs).sqrt())
        .collect();
    let ci = estimate
        .iter()
        .zip(&se)
        .map(|(&e, &s)| [e - crit * s, e + crit * s])
        .collect();
    Ok(InferenceReport {
        level: cfg.level,
        estimate,
        se,
        ci,
        sigma_xi: sigma,
        theta_xi,
        refit: cfg.refit_on_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{pair_at, sample_srgm};
    use crate::model::link_prob;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn random_theta(n: usize, p: usize, rng: &mut impl Rng) -> Theta {
        Theta::new(
            (0..n).map(|_| rng.random_range(0.0..1.5)).collect(),
            (0..n).map(|_| rng.random_range(0.0..1.5)).collect(),
            rng.random_range(-2.0..0.5),
            (0..p).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_theta_without_covariates_gives_a_quarter() {
        let s = sigma_xi(&Theta::zeros(5, 0), &EdgeCovariates::empty(5)).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0][0] - 0.25).abs() < 1e-15);
        let inv = invert_sigma_xi(&s).unwrap();
        assert!((inv[0][0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn sigma_matches_dense_design_oracle() {
        let mut rng = stream_rng(31, 0);
        for n in 3..=6 {
            for p in 0..=2 {
                let z = EdgeCovariates::sample_centered_beta(n, p, &mut rng);
                let theta = random_theta(n, p, &mut rng);
                let pairs = n * (n - 1);
                let d = DMatrix::from_fn(pairs, p + 1, |k, c| {
                    if c == 0 {
                        1.0
                    } else {
                        z.row(k)[c - 1]
                    }
                });
                let w = DMatrix::from_fn(pairs, pairs, |a, b| {
                    if a != b {
                        return 0.0;
                    }
                    let (i, j) = pair_at(n, a);
                    let q = link_prob(&theta, &z, i, j).unwrap();
                    q * (1.0 - q)
                });
                let oracle = d.transpose() * w * &d / pairs as f64;
                let s = sigma_xi(&theta, &z).unwrap();
                let o: Vec<Vec<f64>> = (0..=p)
                    .map(|a| (0..=p).map(|b| oracle[(a, b)]).collect())
                    .collect();
                assert!(max_abs_diff(&s, &o) < 1e-12);
                let c2 = z.c_bound().powi(2).max(1.0);
                assert!((0..=p).all(|k| s[k][k] <= c2 / 4.0 + 1e-15));
                for _ in 0..10 {
                    let v: Vec<f64> = (0..=p).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let q: f64 = (0..=p)
                        .flat_map(|a| (0..=p).map(move |b| (a, b)))
                        .map(|(a, b)| v[a] * s[a][b] * v[b])
                        .sum();
                    assert!(q >= -1e-15);
                }
            }
        }
    }

    fn adjugate_inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match m.len() {
            1 => vec![vec![1.0 / m[0][0]]],
            2 => {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                vec![
                    vec![m[1][1] / det, -m[0][1] / det],
                    vec![-m[1][0] / det, m[0][0] / det],
                ]
            }
            3 => {
                let cof = |r: usize, c: usize| {
                    let rows: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                    let cols: Vec<usize> = (0..3).filter(|&x| x != c).collect();
                    let minor = m[rows[0]][cols[0]] * m[rows[1]][cols[1]]
                        - m[rows[0]][cols[1]] * m[rows[1]][cols[0]];
                    if (r + c) % 2 == 0 {
                        minor
                    } else {
                        -minor
                    }
                };
                let det: f64 = (0..3).map(|c| m[0][c] * cof(0, c)).sum();
                (0..3)
                    .map(|r| (0..3).map(|c| cof(c, r) / det).collect())
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn cholesky_inverse_matches_adjugate() {
        let mut rng = stream_rng(32, 0);
        for d in 1..=3 {
            for _ in 0..50 {
                let a: Vec<Vec<f64>> = (0..d)
                    .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect();
                let m: Vec<Vec<f64>> = (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|c| {
                                (0..d).map(|k| a[r][k] * a[c][k]).sum::<f64>()
                                    + if r == c { 0.1 } else { 0.0 }
                            })
                            .collect()
                    })
                    .collect();
                let inv = invert_sigma_xi(&m).unwrap();
                assert!(max_abs_diff(&inv, &adjugate_inverse(&m)) < 1e-10);
                for r in 0..d {
                    for c in 0..d {
                        let v: f64 = (0..d).map(|k| m[r][k] * inv[k][c]).sum();
                        let e = if r == c { 1.0 } else { 0.0 };
                        assert!((v - e).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_and_singular_inputs() {
        let m = vec![vec![2.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 8.0]];
        let inv = invert_sigma_xi(&m).unwrap();
        let expect = vec![vec![0.5, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.125]];
        assert!(max_abs_diff(&inv, &expect) < 1e-15);
        let singular = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        match invert_sigma_xi(&singular) {
            Err(SrgmError::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("{other:?}"),
        }
        let near = vec![vec![1.0, 0.0], vec![0.0, 1e-13]];
        match invert_sigma_xi(&near) {
            Err(SrgmError::IllConditioned { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("{other:?}"),
        }
        assert!(invert_sigma_xi(&[vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn critical_values() {
        assert!((critical_value(0.95).unwrap() - 1.959964).abs() < 1e-6);
        assert!((critical_value(0.9).unwrap() - 1.644854).abs() < 1e-6);
        assert!(critical_value(1.0).is_err());
        assert!(critical_value(0.0).is_err());
    }

    #[test]
    fn intervals_are_centred_at_the_penalized_estimate() {
        let mut rng = stream_rng(33, 0);
        let n = 30;
        let z = EdgeCovariates::sample_centered_beta(n, 2, &mut rng);
        let mut theta = Theta::zeros(n, 2);
        theta.alpha[0] = 1.5;
        theta.beta[1] = 1.0;
        theta.mu = -1.0;
        theta.gamma = vec![1.0, 0.8];
        let g = sample_srgm(&theta, &z, &mut rng).unwrap();
        let fit = crate::solver::fit(&g, &z, &FitConfig::with_lambda(0.002), None).unwrap();
        let r = wald_ci(&fit, &g, &z, &InferenceConfig::default()).unwrap();
        assert_eq!(r.estimate[0], fit.theta_hat.mu);
        assert_eq!(&r.estimate[1..], &fit.theta_hat.gamma[..]);
        for k in 0..3 {
            assert!(r.se[k] > 0.0);
            assert!((0.5 * (r.ci[k][0] + r.ci[k][1]) - r.estimate[k]).abs() < 1e-14);
            assert!((r.ci_length(k) - 2.0 * 1.959964 * r.se[k]).abs() < 1e-5 * r.se[k]);
        }
        let refit = wald_ci(
            &fit,
            &g,
            &z,
            &InferenceConfig {
                refit_on_support: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(refit.refit);
        assert_eq!(refit.estimate, r.estimate);
        let mut bad = fit.clone();
        bad.converged = false;
        assert!(wald_ci(&bad, &g, &z, &InferenceConfig::default()).is_err());
    }
}
