//! Numeric checks of the matrix conditions used by the selection and
//! consistency theory, and the excess risk used as a simulation metric.
//!
//! `Q = X' W0^2 X / (n - 1)` is the Hessian of the rescaled likelihood in the
//! heterogeneity parameters, with `X` the two indicator blocks of the design
//! and `W0^2 = diag(p_ij (1 - p_ij))` at the true parameter.

use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgmError};
use crate::graph::{pair_index, DirectedGraph};
use crate::model::{gram_adjusted, softplus, EdgeCovariates, GramMode, Likelihood, Theta};
use crate::rng::stream_rng;

/// Slack allowed when comparing a computed quantity against its bound.
pub const CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionContext {
    pub n: usize,
    pub s_alpha: usize,
    pub s_beta: usize,
    /// Weight floor used by the lemma checks; absent for compatibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub lhs: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// `|lhs - bound| <= CHECK_TOL`.
    pub equality: bool,
    pub context: ConditionContext,
    /// Probe count, violations and worst margin for probe-based checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub probes: usize,
    pub violations: usize,
    /// Smallest `bound * theta' Sigma theta - |theta_S|_1^2` over probes,
    /// scaled by `|theta_S|_1^2`.
    pub worst_margin: f64,
}

pub fn write_reports<W: Write>(reports: &[ConditionReport], mut w: W) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut w, r).map_err(|e| SrgmError::InvalidInput(e.to_string()))?;
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QBlocks {
    /// Support indices in `0..2n` (alpha first), sorted.
    pub support: Vec<usize>,
    pub complement: Vec<usize>,
    pub ss: DMatrix<f64>,
    pub sc_s: DMatrix<f64>,
}

/// Bernoulli variances at `theta`, one per ordered pair.
fn weights(theta: &Theta, z: &EdgeCovariates) -> Result<Vec<f64>> {
    theta.check_against(z)?;
    let g = DirectedGraph::from_edges(z.n(), &[])?;
    Ok(Likelihood::new(&g, z)?.weights(&theta.to_vec()))
}

/// `2 min_ij p_ij (1 - p_ij)` at `theta`, the exact weight floor of the instance.
pub fn instance_rho(theta: &Theta, z: &EdgeCovariates) -> Result<f64> {
    let w = weights(theta, z)?;
    Ok(2.0 * w.iter().copied().fold(f64::INFINITY, f64::min))
}

fn normalize_support(support: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&k| k >= 2 * n) {
        return Err(SrgmError::InvalidInput(format!(
            "support index {bad} outside 0..{}",
            2 * n
        )));
    }
    Ok(s)
}

struct QEntries {
    n: usize,
    w: Vec<f64>,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl QEntries {
    fn new(theta: &Theta, z: &EdgeCovariates) -> Result<Self> {
        let n = z.n();
        let w = weights(theta, z)?;
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut k = 0;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                row[i] += w[k];
                col[j] += w[k];
                k += 1;
            }
        }
        Ok(QEntries { n, w, row, col })
    }

    fn get(&self, a: usize, b: usize) -> f64 {
        let n = self.n;
        let scale = 1.0 / (n - 1) as f64;
        match (a < n, b < n) {
            (true, true) => {
                if a == b {
                    self.row[a] * scale
                } else {
                    0.0
                }
            }
            (false, false) => {
                if a == b {
                    self.col[a - n] * scale
                } else {
                    0.0
                }
            }
            (true, false) | (false, true) => {
                let (i, j) = if a < n { (a, b - n) } else { (b, a - n) };
                if i == j {
                    0.0
                } else {
                    self.w[pair_index(n, i, j)] * scale
                }
            }
        }
    }
}

/// Blocks `Q_{S,S}` and `Q_{S^c,S}` of `Q` at `theta0`.
pub fn q_matrix(theta0: &Theta, z: &EdgeCovariates, support: &[usize]) -> Result<QBlocks> {
    let n = z.n();
    let support = normalize_support(support, n)?;
    let q = QEntries::new(theta0, z)?;
    let mut in_s = vec![false; 2 * n];
    support.iter().for_each(|&k| in_s[k] = true);
    let complement: Vec<usize> = (0..2 * n).filter(|&k| !in_s[k]).collect();
    let s = support.len();
    let ss = DMatrix::from_fn(s, s, |a, b| q.get(support[a], support[b]));
    let sc_s = DMatrix::from_fn(complement.len(), s, |a, b| q.get(complement[a], support[b]));
    Ok(QBlocks {
        support,
        complement,
        ss,
        sc_s,
    })
}

fn context(n: usize, support: &[usize], rho_n: Option<f64>) -> ConditionContext {
    let s_alpha = support.iter().filter(|&&k| k < n).count();
    ConditionContext {
        n,
        s_alpha,
        s_beta: support.len() - s_alpha,
        rho_n,
    }
}

fn resolve_rho(theta0: &Theta, z: &EdgeCovariates, rho_n: Option<f64>) -> Result<f64> {
    match rho_n {
        Some(r) if r > 0.0 && r <= 1.0 => Ok(r),
        Some(r) => Err(SrgmError::InvalidProbability {
            what: "weight floor rho_n",
            value: r,
        }),
        None => instance_rho(theta0, z),
    }
}

fn report(name: &str, lhs: f64, bound: f64, satisfied: bool, ctx: ConditionContext) -> ConditionReport {
    ConditionReport {
        name: name.to_string(),
        lhs,
        bound,
        satisfied,
        equality: (lhs - bound).abs() <= CHECK_TOL,
        context: ctx,
        probes: None,
    }
}

/// Smallest eigenvalue of `Q_{S,S}` against
/// `rho_n / 2 * (1 - max(s_alpha, s_beta) / (n - 1))`.
/// `rho_n = None` uses [`instance_rho`].
pub fn check_dependency(
    theta0: &Theta,
    z: &EdgeCovariates,
    support: &[usize],
    rho_n: Option<f64>,
) -> Result<ConditionReport> {
    let rho = resolve_rho(theta0, z, rho_n)?;
    let q = q_matrix(theta0, z, support)?;
    let n = z.n();
    let ctx = context(n, &q.support, Some(rho));
    let smax = ctx.s_alpha.max(ctx.s_beta) as f64;
    let bound = 0.5 * rho * (1.0 - smax / (n - 1) as f64);
    if q.support.is_empty() {
        return Ok(report("dependency", f64::INFINITY, bound, true, ctx));
    }
    let lhs = q
        .ss
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(report("dependency", lhs, bound, lhs >= bound - CHECK_TOL, ctx))
}

/// `|Q_{S^c,S} Q_{S,S}^{-1}|_inf` against
/// `max(s_alpha, s_beta) / (2 rho_n (n - max(s_alpha, s_beta)))`.
pub fn check_incoherence(
    theta0: &Theta,
    z: &EdgeCovariates,
    support: &[usize],
    rho_n: Option<f64>,
) -> Result<ConditionReport> {
    let rho = resolve_rho(theta0, z, rho_n)?;
    let q = q_matrix(theta0, z, support)?;
    let n = z.n();
    let ctx = context(n, &q.support, Some(rho));
    let smax = ctx.s_alpha.max(ctx.s_beta) as f64;
    let bound = 0.5 / rho * smax / (n as f64 - smax);
    if q.support.is_empty() || q.complement.is_empty() {
        return Ok(report("incoherence", 0.0, bound, true, ctx));
    }
    let inv = q.ss.clone().cholesky().map(|c| c.inverse()).ok_or_else(|| {
        SrgmError::NumericalFailure {
            iter: 0,
            detail: "Q_{S,S} is singular; the supplied rho_n is not a valid weight floor".into(),
        }
    })?;
    let m = &q.sc_s * inv;
    let lhs = m
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(report("incoherence", lhs, bound, lhs <= bound + CHECK_TOL, ctx))
}

/// `S_0` plus the `mu` and `gamma` coordinates, in `0..2n+1+p`.
pub fn support_plus(support: &[usize], n: usize, p: usize) -> Vec<usize> {
    let mut s: Vec<usize> = support.to_vec();
    s.extend(2 * n..2 * n + 1 + p);
    s.sort_unstable();
    s.dedup();
    s
}

/// Smallest eigenvalue of `Z'Z / N`, capped at 1/2 (1/2 without covariates).
pub fn estimate_c_min(z: &EdgeCovariates) -> f64 {
    let p = z.p();
    if p == 0 {
        return 0.5;
    }
    let mut m = DMatrix::<f64>::zeros(p, p);
    for k in 0..z.num_pairs() {
        let r = z.row(k);
        for a in 0..p {
            for b in 0..p {
                m[(a, b)] += r[a] * r[b];
            }
        }
    }
    m /= z.num_pairs() as f64;
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min(0.5)
}

fn l1(v: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&k| v[k].abs()).sum()
}

fn cone_probe<R: Rng>(dim: usize, s_plus: &[usize], comp: &[usize], rng: &mut R) -> Vec<f64> {
    loop {
        let mut v = vec![0.0; dim];
        for &k in s_plus {
            v[k] = rng.sample(StandardNormal);
        }
        if !comp.is_empty() && rng.random_bool(0.9) {
            // Random sparsity level, log-uniform over 1..=|S^c|.
            let max_k = comp.len() as f64;
            let k = (max_k.ln() * rng.random::<f64>()).exp().round().max(1.0) as usize;
            let picked = sample(rng, comp.len(), k.min(comp.len()));
            let mut u: Vec<f64> = picked.iter().map(|_| rng.sample(StandardNormal)).collect();
            let norm: f64 = u.iter().map(|x: &f64| x.abs()).sum();
            let radius = rng.random_range(0.0..3.5) * l1(&v, s_plus) / norm.max(f64::MIN_POSITIVE);
            u.iter_mut().for_each(|x| *x *= radius);
            for (&c, x) in picked.iter().map(|i| &comp[i]).zip(u) {
                v[c] = x;
            }
        }
        if l1(&v, comp) <= 3.0 * l1(&v, s_plus) {
            return v;
        }
    }
}

/// Probe-based check of `|theta_S+|_1^2 <= 2 s_+ / c_min * theta' Sigma theta`
/// on the cone `|theta_{S+^c}|_1 <= 3 |theta_S+|_1`, with `Sigma` the
/// population-mode adjusted Gram matrix. `lhs` is the largest observed
/// `|theta_S+|_1^2 / theta' Sigma theta` and `bound` is `2 s_+ / c_min`.
pub fn check_compatibility(
    z: &EdgeCovariates,
    n: usize,
    support_plus: &[usize],
    probes: usize,
    seed: u64,
    c_min: Option<f64>,
) -> Result<ConditionReport> {
    let p = z.p();
    let dim = 2 * n + 1 + p;
    let mut s_plus = support_plus.to_vec();
    s_plus.sort_unstable();
    s_plus.dedup();
    if s_plus.iter().any(|&k| k >= dim) {
        return Err(SrgmError::InvalidInput("support index out of range".into()));
    }
    let c_min = c_min.unwrap_or_else(|| estimate_c_min(z));
    if !(c_min > 0.0) {
        return Err(SrgmError::InvalidInput(format!(
            "c_min must be positive (got {c_min})"
        )));
    }
    let sigma = gram_adjusted(z, n, GramMode::PopulationZeroMean)?;
    let mut member = vec![false; dim];
    s_plus.iter().for_each(|&k| member[k] = true);
    let comp: Vec<usize> = (0..dim).filter(|&k| !member[k]).collect();
    let bound = 2.0 * s_plus.len() as f64 / c_min;
    let ctx = context(n, &s_plus.iter().copied().filter(|&k| k < 2 * n).collect::<Vec<_>>(), None);

    let stats: Vec<(f64, f64)> = (0..probes as u64)
        .into_par_iter()
        .map(|r| {
            if s_plus.is_empty() {
                return (0.0, 0.0);
            }
            let mut rng = stream_rng(seed, r);
            let v = cone_probe(dim, &s_plus, &comp, &mut rng);
            let x = nalgebra::DVector::from_vec(v.clone());
            let quad = x.dot(&(&sigma * &x));
            let lhs = l1(&v, &s_plus).powi(2);
            let ratio = if quad > 0.0 { lhs / quad } else { f64::INFINITY };
            (ratio, (bound * quad - lhs) / lhs.max(f64::MIN_POSITIVE))
        })
        .collect();
    let worst_ratio = stats.iter().map(|s| s.0).fold(0.0, f64::max);
    let worst_margin = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let violations = stats.iter().filter(|s| s.1 < -CHECK_TOL).count();
    let mut r = report("compatibility", worst_ratio, bound, violations == 0, ctx);
    r.equality = false;
    r.probes = Some(ProbeSummary {
        probes,
        violations,
        worst_margin: if probes == 0 { 0.0 } else { worst_margin },
    });
    Ok(r)
}

/// `(1/N) sum_ij [-p0_ij eta_ij + log(1 + e^eta_ij)]` minus the same at
/// `theta0`, where `eta = D theta` and `p0` are the true probabilities.
pub fn excess_risk(theta: &Theta, theta0: &Theta, z: &EdgeCovariates) -> Result<f64> {
    theta.check_against(z)?;
    theta0.check_against(z)?;
    let n = z.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let e = theta.predictor(z, i, j);
            let e0 = theta0.predictor(z, i, j);
            let p0 = crate::model::sigmoid(e0);
            total += -p0 * (e - e0) + softplus(e) - softplus(e0);
        }
    }
    Ok(total / z.num_pairs() as f64)
}

/// Random check instance: `n` uniform on `n_min..=n_max`, `p` in `0..=2`,
/// centred Beta(2,2) covariates, `1..=6` active heterogeneity entries with
/// values in `(0.1, 2)`, `mu` in `(-3, 0)` and `gamma` in `(-1, 1)^p`.
pub fn random_lemma_instance(
    seed: u64,
    n_min: usize,
    n_max: usize,
) -> (Theta, EdgeCovariates, Vec<usize>) {
    let mut rng = stream_rng(seed, 0);
    let n = rng.random_range(n_min.max(4)..=n_max.max(n_min.max(4)));
    let p = rng.random_range(0..=2);
    let z = EdgeCovariates::sample_centered_beta(n, p, &mut rng);
    let s = rng.random_range(1..=6);
    let mut support: Vec<usize> = sample(&mut rng, 2 * n, s).into_vec();
    support.sort_unstable();
    let mut theta = Theta::zeros(n, p);
    for &k in &support {
        let v = rng.random_range(0.1..2.0);
        if k < n {
            theta.alpha[k] = v;
        } else {
            theta.beta[k - n] = v;
        }
    }
    theta.mu = rng.random_range(-3.0..0.0);
    theta.gamma = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    (theta, z, support)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub instances: usize,
    pub dependency_violations: usize,
    pub incoherence_violations: usize,
    /// Smallest `lhs - bound` seen for the dependency check.
    pub dependency_worst_margin: f64,
    /// Smallest `bound - lhs` seen for the incoherence check.
    pub incoherence_worst_margin: f64,
    /// Seeds of the violating instances.
    pub violating_seeds: Vec<u64>,
}

/// Runs both lemma checks on `count` instances from [`random_lemma_instance`]
/// with seeds `derive_seed(seed, k)`.
pub fn lemma_sweep(count: usize, seed: u64, n_min: usize, n_max: usize) -> Result<SweepSummary> {
    let rows: Vec<(u64, ConditionReport, ConditionReport)> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let s = crate::rng::derive_seed(seed, k);
            let (theta, z, support) = random_lemma_instance(s, n_min, n_max);
            Ok((
                s,
                check_dependency(&theta, &z, &support, None)?,
                check_incoherence(&theta, &z, &support, None)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut out = SweepSummary {
        instances: count,
        dependency_violations: 0,
        incoherence_violations: 0,
        dependency_worst_margin: f64::INFINITY,
        incoherence_worst_margin: f64::INFINITY,
        violating_seeds: Vec::new(),
    };
    for (s, dep, inc) in rows {
        out.dependency_worst_margin = out.dependency_worst_margin.min(dep.lhs - dep.bound);
        out.incoherence_worst_margin = out.incoherence_worst_margin.min(inc.bound - inc.lhs);
        out.dependency_violations += usize::from(!dep.satisfied);
        out.incoherence_violations += usize::from(!inc.satisfied);
        if !dep.satisfied || !inc.satisfied {
            out.violating_seeds.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pair_at;
    use crate::model::link_prob;

    fn uniform(n: usize) -> (Theta, EdgeCovariates) {
        (Theta::zeros(n, 0), EdgeCovariates::empty(n))
    }

    fn random_instance(seed: u64) -> (Theta, EdgeCovariates, Vec<usize>) {
        random_lemma_instance(seed, 7, 12)
    }

    #[test]
    fn q_blocks_match_dense_oracle() {
        for seed in 0..10 {
            let (theta, z, support) = random_instance(seed);
            let n = z.n();
            if n > 9 {
                continue;
            }
            let pairs = n * (n - 1);
            let x = DMatrix::from_fn(pairs, 2 * n, |k, c| {
                let (i, j) = pair_at(n, k);
                f64::from(c == i || c == n + j)
            });
            let w = DMatrix::from_fn(pairs, pairs, |a, b| {
                if a != b {
                    return 0.0;
                }
                let (i, j) = pair_at(n, a);
                let q = link_prob(&theta, &z, i, j).unwrap();
                q * (1.0 - q)
            });
            let full = x.transpose() * w * &x / (n - 1) as f64;
            let q = q_matrix(&theta, &z, &support).unwrap();
            for (a, &sa) in q.support.iter().enumerate() {
                for (b, &sb) in q.support.iter().enumerate() {
                    assert!((q.ss[(a, b)] - full[(sa, sb)]).abs() < 1e-12);
                }
                for (c, &sc) in q.complement.iter().enumerate() {
                    assert!((q.sc_s[(c, a)] - full[(sc, sa)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn uniform_singleton_values() {
        let (theta, z) = uniform(5);
        let q = q_matrix(&theta, &z, &[0]).unwrap();
        assert!((q.ss[(0, 0)] - 0.25).abs() < 1e-15);
        let q = q_matrix(&theta, &z, &[0, 1]).unwrap();
        assert_eq!(q.ss[(0, 1)], 0.0);
        assert!((instance_rho(&theta, &z).unwrap() - 0.5).abs() < 1e-15);

        let inc = check_incoherence(&theta, &z, &[0], None).unwrap();
        assert!((inc.lhs - 0.25).abs() < 1e-12);
        assert!((inc.bound - 0.25).abs() < 1e-15);
        assert!(inc.satisfied && inc.equality);

        let dep = check_dependency(&theta, &z, &[0], None).unwrap();
        assert!((dep.lhs - 0.25).abs() < 1e-12);
        // 0.5 * 0.5 * (1 - 1/4)
        assert!((dep.bound - 0.1875).abs() < 1e-15);
        assert!(dep.satisfied && !dep.equality);
    }

    #[test]
    fn alpha_beta_pair_is_tight_for_dependency() {
        let (theta, z) = uniform(5);
        // S = {alpha_1, beta_2}: Q_SS = [[1/4, 1/16], [1/16, 1/4]], min eigenvalue 3/16
        let dep = check_dependency(&theta, &z, &[0, 6], None).unwrap();
        assert!((dep.lhs - 0.1875).abs() < 1e-12);
        assert!(dep.satisfied && dep.equality);
        // Incoherence: complement rows sum to 1/(n-2) = 1/3 > bound 1/4.
        let inc = check_incoherence(&theta, &z, &[0, 6], None).unwrap();
        assert!((inc.lhs - 1.0 / 3.0).abs() < 1e-12);
        assert!((inc.bound - 0.25).abs() < 1e-15);
        assert!(!inc.satisfied);
    }

    #[test]
    fn empty_and_full_supports_are_vacuous() {
        let (theta, z) = uniform(6);
        assert!(check_dependency(&theta, &z, &[], None).unwrap().satisfied);
        let all: Vec<usize> = (0..12).collect();
        let inc = check_incoherence(&theta, &z, &all, None).unwrap();
        assert_eq!(inc.lhs, 0.0);
        assert!(inc.satisfied);
        assert!(q_matrix(&theta, &z, &[12]).is_err());
    }

    #[test]
    fn dependency_holds_on_random_instances() {
        for seed in 0..100 {
            let (theta, z, support) = random_instance(100 + seed);
            let r = check_dependency(&theta, &z, &support, None).unwrap();
            assert!(r.satisfied, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn compatibility_on_its_own_support() {
        let mut rng = stream_rng(7, 0);
        let n = 20;
        let z = EdgeCovariates::sample_centered_beta(n, 1, &mut rng);
        let sp = support_plus(&[0, n + 3], n, 1);
        assert_eq!(sp, vec![0, n + 3, 2 * n, 2 * n + 1]);
        let r = check_compatibility(&z, n, &sp, 500, 3, None).unwrap();
        let probes = r.probes.as_ref().unwrap();
        assert_eq!(probes.probes, 500);
        assert!(r.lhs.is_finite() && r.lhs > 0.0);
        assert_eq!(r.satisfied, probes.violations == 0);
        assert!(r.bound > 0.0);
        let c = estimate_c_min(&z);
        assert!(c > 0.03 && c < 0.07, "{c}");
        let again = check_compatibility(&z, n, &sp, 500, 3, None).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn excess_risk_properties() {
        let (theta0, z, _) = random_instance(5);
        assert!(excess_risk(&theta0, &theta0, &z).unwrap().abs() < 1e-15);
        let mut rng = stream_rng(6, 0);
        for _ in 0..20 {
            let mut t = theta0.clone();
            t.mu += rng.random_range(-1.0..1.0);
            t.alpha[0] += rng.random_range(0.0..1.0);
            assert!(excess_risk(&t, &theta0, &z).unwrap() >= 0.0);
        }
    }

    #[test]
    fn reports_serialize_as_json_lines() {
        let (theta, z) = uniform(5);
        let r = check_dependency(&theta, &z, &[0], None).unwrap();
        let mut buf = Vec::new();
        write_reports(&[r.clone(), r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: ConditionReport = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back.name, "dependency");
    }
}
