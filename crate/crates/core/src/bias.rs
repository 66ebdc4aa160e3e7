//! Bias of estimates computed from the giant component only.
//!
//! For ER(lambda/n) the edge density of the giant component overestimates
//! `p` by the factor `(1 + eta) / (1 - eta)`, where `eta` is the extinction
//! probability of a Poisson(lambda) branching process. The SBM experiment
//! measures the same effect for a two-block model with known membership.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SrgmError};
use crate::graph::{components, sample_er, sample_sbm2, UndirectedView};
use crate::rng::stream_rng;

/// Root `eta < 1` of `eta = exp(lambda (eta - 1))`.
pub fn eta_lambda(lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(SrgmError::NoSubcriticalSolution { lambda });
    }
    let map = |e: f64| (lambda * (e - 1.0)).exp();
    let residual = |e: f64| (map(e) - e).abs();

    let mut eta: f64 = 0.5;
    for _ in 0..100_000 {
        let next = 0.5 * eta + 0.5 * map(eta);
        let step = (next - eta).abs();
        eta = next;
        if step < tol {
            break;
        }
    }
    if eta < 1.0 - 1e-9 && residual(eta) < 1e-10 {
        return Ok(eta);
    }

    // exp(lambda (e - 1)) - e is positive at 0 and negative just below 1.
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-9);
    while hi - lo > tol.max(f64::EPSILON) {
        let mid = 0.5 * (lo + hi);
        if map(mid) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn asymptotic_bias(eta: f64) -> f64 {
    (1.0 + eta) / (1.0 - eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub eta: f64,
    pub bias: f64,
}

pub fn bias_curve(lambdas: &[f64]) -> Result<Vec<CurvePoint>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let eta = eta_lambda(lambda, 1e-12)?;
            Ok(CurvePoint {
                lambda,
                eta,
                bias: asymptotic_bias(eta),
            })
        })
        .collect()
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Size, edge count and edge density of the giant component, or `None`
/// when it has fewer than two nodes.
pub fn giant_density(g: &UndirectedView) -> Option<(usize, usize, f64)> {
    let cd = components(g);
    let size = cd.giant_size();
    if size < 2 {
        return None;
    }
    let edges = g.edges().filter(|&(i, _)| cd.in_giant(i)).count();
    let pairs = size as f64 * (size as f64 - 1.0) / 2.0;
    Some((size, edges, edges as f64 / pairs))
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// One CSV row: a summary statistic of one experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub n: usize,
    pub lambda_or_a: f64,
    pub b: Option<f64>,
    pub reps: usize,
    pub stat: &'static str,
    pub mean: f64,
    pub sd: f64,
}

pub const STAT_HEADER: &str = "n,lambda_or_a,b,reps,stat,mean,sd";

pub fn write_stat_rows<W: Write>(rows: &[StatRow], mut w: W) -> Result<()> {
    writeln!(w, "{STAT_HEADER}")?;
    for r in rows {
        let b = r.b.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n, r.lambda_or_a, b, r.reps, r.stat, r.mean, r.sd
        )?;
    }
    Ok(())
}

pub fn write_curve<W: Write>(points: &[CurvePoint], mut w: W) -> Result<()> {
    writeln!(w, "lambda,eta,bias")?;
    for p in points {
        writeln!(w, "{},{},{}", p.lambda, p.eta, p.bias)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErBiasResult {
    pub n: usize,
    pub lambda: f64,
    pub eta: f64,
    pub asymptotic_bias: f64,
    pub ratio_mean: f64,
    pub ratio_sd: f64,
    pub giant_frac_mean: f64,
    pub giant_frac_sd: f64,
    /// Replications that entered the averages.
    pub reps: usize,
    /// Replications without a giant component of at least two nodes.
    pub skipped: usize,
    pub warnings: Vec<String>,
}

impl ErBiasResult {
    pub fn rows(&self) -> Vec<StatRow> {
        let row = |stat, mean, sd| StatRow {
            n: self.n,
            lambda_or_a: self.lambda,
            b: None,
            reps: self.reps,
            stat,
            mean,
            sd,
        };
        vec![
            row("ratio", self.ratio_mean, self.ratio_sd),
            row("giant_frac", self.giant_frac_mean, self.giant_frac_sd),
            row("asymptotic_bias", self.asymptotic_bias, 0.0),
            row("eta", self.eta, 0.0),
            row("skipped", self.skipped as f64, 0.0),
        ]
    }
}

/// Monte-Carlo of `p_hat_max / p` for ER(lambda/n); replication `r` uses
/// stream `r` of `seed`.
pub fn er_bias_experiment(n: usize, lambda: f64, reps: usize, seed: u64) -> Result<ErBiasResult> {
    let eta = eta_lambda(lambda, 1e-12)?;
    let p = lambda / n as f64;
    let draws: Vec<Option<(f64, f64)>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Option<(f64, f64)>> {
            let g = sample_er(n, lambda, &mut stream_rng(seed, r))?;
            Ok(giant_density(&g).map(|(size, _, d)| (d / p, size as f64 / n as f64)))
        })
        .collect::<Result<_>>()?;
    let kept: Vec<(f64, f64)> = draws.iter().flatten().copied().collect();
    let ratios: Vec<f64> = kept.iter().map(|k| k.0).collect();
    let fracs: Vec<f64> = kept.iter().map(|k| k.1).collect();
    let (ratio_mean, ratio_sd) = mean_sd(&ratios);
    let (giant_frac_mean, giant_frac_sd) = mean_sd(&fracs);
    let mut warnings = Vec::new();
    if n < 1000 {
        warnings.push(format!(
            "n = {n} is small; the giant component may not dominate"
        ));
    }
    Ok(ErBiasResult {
        n,
        lambda,
        eta,
        asymptotic_bias: asymptotic_bias(eta),
        ratio_mean,
        ratio_sd,
        giant_frac_mean,
        giant_frac_sd,
        reps: kept.len(),
        skipped: reps - kept.len(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbmBiasResult {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub full_graph: bool,
    pub giant_frac_mean: f64,
    pub giant_frac_sd: f64,
    pub rho_mean: f64,
    pub rho_sd: f64,
    pub a_hat_mean: f64,
    pub a_hat_sd: f64,
    pub b_hat_mean: f64,
    pub b_hat_sd: f64,
    pub reps: usize,
    /// Replications with no within-block or no between-block pair among the
    /// retained nodes.
    pub degenerate: usize,
}

impl SbmBiasResult {
    pub fn rows(&self) -> Vec<StatRow> {
        let row = |stat, mean, sd| StatRow {
            n: self.n,
            lambda_or_a: self.a,
            b: Some(self.b),
            reps: self.reps,
            stat,
            mean,
            sd,
        };
        vec![
            row("giant_frac", self.giant_frac_mean, self.giant_frac_sd),
            row("rho", self.rho_mean, self.rho_sd),
            row("a_hat", self.a_hat_mean, self.a_hat_sd),
            row("b_hat", self.b_hat_mean, self.b_hat_sd),
            row("degenerate", self.degenerate as f64, 0.0),
        ]
    }
}

struct SbmDraw {
    giant_frac: f64,
    a_hat: f64,
    b_hat: f64,
}

fn sbm_draw(g: &UndirectedView, block: &[u8], n: usize, full_graph: bool) -> Option<SbmDraw> {
    let keep: Vec<bool> = if full_graph {
        vec![true; n]
    } else {
        let cd = components(g);
        (0..n).map(|v| cd.in_giant(v)).collect()
    };
    let mut counts = [0usize; 2];
    for v in (0..n).filter(|&v| keep[v]) {
        counts[block[v] as usize] += 1;
    }
    let (c0, c1) = (counts[0] as f64, counts[1] as f64);
    let within_pairs = c0 * (c0 - 1.0) / 2.0 + c1 * (c1 - 1.0) / 2.0;
    let between_pairs = c0 * c1;
    if within_pairs == 0.0 || between_pairs == 0.0 {
        return None;
    }
    let (mut within, mut between) = (0usize, 0usize);
    for (i, j) in g.edges() {
        if keep[i] && keep[j] {
            if block[i] == block[j] {
                within += 1;
            } else {
                between += 1;
            }
        }
    }
    let nf = n as f64;
    Some(SbmDraw {
        giant_frac: (counts[0] + counts[1]) as f64 / nf,
        a_hat: nf * within as f64 / within_pairs,
        b_hat: nf * between as f64 / between_pairs,
    })
}

/// Oracle-membership estimates of `(a, b)` from the giant-induced subgraph
/// (or the whole graph when `full_graph`), with spectral ratio
/// `rho = (a_hat + b_hat) / (a + b)`.
pub fn sbm_bias_experiment(
    n: usize,
    a: f64,
    b: f64,
    reps: usize,
    seed: u64,
    full_graph: bool,
) -> Result<SbmBiasResult> {
    if !(a + b > 0.0) {
        return Err(SrgmError::InvalidInput(
            "spectral ratio needs a + b > 0".into(),
        ));
    }
    let draws: Vec<Option<SbmDraw>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Option<SbmDraw>> {
            let (g, block) = sample_sbm2(n, a, b, &mut stream_rng(seed, r))?;
            Ok(sbm_draw(&g, &block, n, full_graph))
        })
        .collect::<Result<_>>()?;
    let kept: Vec<&SbmDraw> = draws.iter().flatten().collect();
    let stat = |f: &dyn Fn(&SbmDraw) -> f64| mean_sd(&kept.iter().map(|d| f(d)).collect::<Vec<_>>());
    let (giant_frac_mean, giant_frac_sd) = stat(&|d| d.giant_frac);
    let (rho_mean, rho_sd) = stat(&|d| (d.a_hat + d.b_hat) / (a + b));
    let (a_hat_mean, a_hat_sd) = stat(&|d| d.a_hat);
    let (b_hat_mean, b_hat_sd) = stat(&|d| d.b_hat);
    Ok(SbmBiasResult {
        n,
        a,
        b,
        full_graph,
        giant_frac_mean,
        giant_frac_sd,
        rho_mean,
        rho_sd,
        a_hat_mean,
        a_hat_sd,
        b_hat_mean,
        b_hat_sd,
        reps: kept.len(),
        degenerate: reps - kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_values() {
        for lambda in [1.3, 1.5, 2.0, 3.0, 4.0, 6.0, 7.0, 1.01, 20.0] {
            let eta = eta_lambda(lambda, 1e-12).unwrap();
            assert!(eta > 0.0 && eta < 1.0);
            assert!(((lambda * (eta - 1.0)).exp() - eta).abs() < 1e-10, "{lambda}");
        }
        assert!((eta_lambda(2.0, 1e-12).unwrap() - 0.20319).abs() < 5e-6);
        let e4 = eta_lambda(4.0, 1e-12).unwrap();
        assert!((e4 - 0.01983).abs() < 5e-6);
        assert!((asymptotic_bias(e4) - 1.04046).abs() < 5e-6);
        let e6 = eta_lambda(6.0, 1e-12).unwrap();
        assert!((e6 - 0.0025165).abs() < 5e-8);
        assert!((asymptotic_bias(e6) - 1.0050456).abs() < 5e-8);
        for bad in [1.0, 0.5, -2.0, f64::NAN] {
            assert!(matches!(
                eta_lambda(bad, 1e-12),
                Err(SrgmError::NoSubcriticalSolution { .. })
            ));
        }
    }

    #[test]
    fn curve_is_decreasing_and_above_one() {
        let pts = bias_curve(&linspace(1.3, 7.0, 58)).unwrap();
        assert!((pts[0].bias - 3.728468).abs() < 1e-5);
        assert!(pts.last().unwrap().bias > 1.0 && pts.last().unwrap().bias < 1.03);
        assert!(pts.windows(2).all(|w| w[1].bias < w[0].bias));
        assert!(bias_curve(&[2.0, 1.0]).is_err());
    }

    #[test]
    fn giant_density_of_a_path_plus_isolate() {
        let g = UndirectedView::from_edges(4, [(0, 1), (1, 2)]);
        let (size, edges, d) = giant_density(&g).unwrap();
        assert_eq!((size, edges), (3, 2));
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
        assert!(giant_density(&UndirectedView::from_edges(3, [])).is_none());
    }

    #[test]
    fn sbm_draw_counts_pairs_by_block() {
        // blocks {0,1} and {2,3}; giant {0,1,2} after dropping node 3
        let g = UndirectedView::from_edges(4, [(0, 1), (1, 2)]);
        let d = sbm_draw(&g, &[0, 0, 1, 1], 4, false).unwrap();
        assert!((d.giant_frac - 0.75).abs() < 1e-15);
        assert!((d.a_hat - 4.0).abs() < 1e-15);
        assert!((d.b_hat - 2.0).abs() < 1e-15);
        let full = sbm_draw(&g, &[0, 0, 1, 1], 4, true).unwrap();
        assert!((full.a_hat - 2.0).abs() < 1e-15);
        assert!((full.b_hat - 1.0).abs() < 1e-15);
        let single_block = UndirectedView::from_edges(4, [(0, 1)]);
        assert!(sbm_draw(&single_block, &[0, 0, 1, 1], 4, false).is_none());
    }

    #[test]
    fn small_experiments_run_and_report() {
        let er = er_bias_experiment(500, 3.0, 8, 1).unwrap();
        assert_eq!(er.reps + er.skipped, 8);
        assert!(!er.warnings.is_empty());
        assert!(er.ratio_mean > 1.0);
        let sbm = sbm_bias_experiment(500, 3.0, 3.0, 8, 1, false).unwrap();
        assert_eq!(sbm.reps + sbm.degenerate, 8);
        assert!(sbm.rho_mean > 1.0);
        let mut buf = Vec::new();
        write_stat_rows(&sbm.rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(STAT_HEADER));
        assert!(text.contains(",rho,"));
        assert!(sbm_bias_experiment(10, 0.0, 0.0, 1, 1, false).is_err());
        assert_eq!(
            er_bias_experiment(300, 2.0, 4, 9).unwrap(),
            er_bias_experiment(300, 2.0, 4, 9).unwrap()
        );
    }
}
