//! Monte-Carlo study: sample, fit a BIC path and the heuristic penalty,
//! attach Wald intervals and score the estimates against the truth.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::excess_risk;
use crate::error::{Result, SrgmError};
use crate::graph::{sample_srgm, DirectedGraph};
use crate::inference::{wald_ci, InferenceConfig};
use crate::model::{link_probs, EdgeCovariates, Theta};
use crate::rng::{derive_seed, stream_rng};
use crate::solver::{FitConfig, FitResult};
pub use crate::tuning::Tuning;
use crate::tuning::{tune_and_fit, TuneOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MuRule {
    /// `mu = -scale * log(log(n))`.
    LogLog { scale: f64 },
    Constant { value: f64 },
}

impl MuRule {
    pub fn mu(&self, n: usize) -> f64 {
        match *self {
            MuRule::LogLog { scale } => -scale * (n as f64).ln().ln(),
            MuRule::Constant { value } => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovariateLaw {
    /// `Beta(2, 2) - 1/2` per entry.
    #[serde(rename = "centred-beta-2-2")]
    CentredBeta22,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimStudyConfig {
    pub n_grid: Vec<usize>,
    /// Total active heterogeneity parameters per entry of `n_grid`;
    /// half are alpha and half beta.
    pub s0_schedule: Vec<usize>,
    /// Leading active values of both templates; the rest are `fill_value`.
    pub template_head: Vec<f64>,
    pub fill_value: f64,
    /// Nodes with both alpha and beta active.
    pub overlap: usize,
    pub mu_rule: MuRule,
    pub gamma: Vec<f64>,
    pub covariate_law: CovariateLaw,
    pub reps: usize,
    pub seed: u64,
    pub tuning: Vec<Tuning>,
    pub path_points: usize,
    /// The path runs from `lambda_max` down to `lambda_max / path_ratio`.
    pub path_ratio: f64,
    pub heuristic_t: f64,
    pub strict_factor_8: bool,
    pub inference: InferenceConfig,
    pub solver: FitConfig,
}

impl Default for SimStudyConfig {
    fn default() -> Self {
        SimStudyConfig {
            n_grid: vec![150, 300],
            s0_schedule: vec![6, 8],
            template_head: vec![2.0, 1.5, 1.0],
            fill_value: 0.8,
            overlap: 2,
            mu_rule: MuRule::LogLog { scale: 1.2 },
            gamma: vec![1.0, 0.8],
            covariate_law: CovariateLaw::CentredBeta22,
            reps: 100,
            seed: 1,
            tuning: vec![Tuning::Bic, Tuning::Heuristic],
            path_points: 50,
            path_ratio: 200.0,
            heuristic_t: 3.0,
            strict_factor_8: false,
            inference: InferenceConfig::default(),
            solver: FitConfig::default(),
        }
    }
}

/// Sparsity schedule of the full study, `n = 150, 200, ..., 800`.
pub const FULL_S0_SCHEDULE: [usize; 14] = [6, 6, 6, 8, 8, 10, 10, 10, 10, 12, 12, 12, 12, 14];

impl SimStudyConfig {
    /// The full grid with 500 replications per `n`.
    pub fn full() -> Self {
        SimStudyConfig {
            n_grid: (0..14).map(|k| 150 + 50 * k).collect(),
            s0_schedule: FULL_S0_SCHEDULE.to_vec(),
            reps: 500,
            ..Default::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimStudyConfig =
            toml::from_str(text).map_err(|e| SrgmError::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        sha256_hex(&self.to_toml())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SrgmError::InvalidInput(m));
        if self.n_grid.is_empty() || self.n_grid.len() != self.s0_schedule.len() {
            return bad(format!(
                "n_grid ({}) and s0_schedule ({}) must be nonempty and of equal length",
                self.n_grid.len(),
                self.s0_schedule.len()
            ));
        }
        if self.reps == 0 || self.tuning.is_empty() || self.path_points == 0 {
            return bad("reps, tuning and path_points must be nonempty".into());
        }
        if !(self.path_ratio > 1.0) {
            return bad("path_ratio must exceed 1".into());
        }
        for (&n, &s0) in self.n_grid.iter().zip(&self.s0_schedule) {
            self.theta0(n, s0)?;
        }
        self.solver.validate()
    }

    /// True parameter at `n` with `s0` active heterogeneity entries: alpha on
    /// nodes `0..k`, beta on nodes `k - overlap .. 2k - overlap`, `k = s0 / 2`,
    /// both following `template_head` then `fill_value`.
    pub fn theta0(&self, n: usize, s0: usize) -> Result<Theta> {
        if s0 % 2 != 0 {
            return Err(SrgmError::InvalidInput(format!("s0 = {s0} must be even")));
        }
        let k = s0 / 2;
        if k < self.overlap || 2 * k - self.overlap >= n {
            return Err(SrgmError::InvalidInput(format!(
                "s0 = {s0} with overlap {} does not fit n = {n}",
                self.overlap
            )));
        }
        let values: Vec<f64> = (0..k)
            .map(|t| self.template_head.get(t).copied().unwrap_or(self.fill_value))
            .collect();
        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        alpha[..k].copy_from_slice(&values);
        beta[k - self.overlap..2 * k - self.overlap].copy_from_slice(&values);
        Theta::new(alpha, beta, self.mu_rule.mu(n), self.gamma.clone())
    }

    fn covariates(&self, n: usize, rng: &mut impl rand::Rng) -> EdgeCovariates {
        match self.covariate_law {
            CovariateLaw::CentredBeta22 => {
                EdgeCovariates::sample_centered_beta(n, self.gamma.len(), rng)
            }
        }
    }

    /// Covariates and graph of replication `rep` at grid position `arm`.
    pub fn sample(&self, arm: usize, rep: usize) -> Result<(Theta, EdgeCovariates, DirectedGraph)> {
        let n = self.n_grid[arm];
        let theta0 = self.theta0(n, self.s0_schedule[arm])?;
        let mut rng = stream_rng(derive_seed(self.seed, n as u64), rep as u64);
        let z = self.covariates(n, &mut rng);
        let g = sample_srgm(&theta0, &z, &mut rng)?;
        Ok((theta0, z, g))
    }
}

/// Outcome of one tuning rule on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedRecord {
    pub tuning: Tuning,
    pub lambda: f64,
    pub converged: bool,
    pub kkt_residual: f64,
    pub support: Vec<usize>,
    pub s_hat: usize,
    pub exact_recovery: bool,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub mae_vartheta: f64,
    pub mu_abs_error: f64,
    pub gamma_l1_error: f64,
    pub excess_risk: f64,
    pub mu_hat: f64,
    pub gamma_hat: Vec<f64>,
    /// `[lower, upper]` for `mu, gamma_1, ..., gamma_p`.
    pub ci: Vec<[f64; 2]>,
    pub covered: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub n: usize,
    pub rep: usize,
    pub edge_density: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub results: Vec<TunedRecord>,
    /// `(tuning, error)` for rules that failed on this replication.
    pub failures: Vec<(Tuning, String)>,
}

fn score(
    tuning: Tuning,
    f: &FitResult,
    theta0: &Theta,
    g: &DirectedGraph,
    z: &EdgeCovariates,
    cfg: &SimStudyConfig,
) -> Result<TunedRecord> {
    let inf = wald_ci(f, g, z, &cfg.inference)?;
    let truth = theta0.support(0.0);
    let hat = &f.support;
    let false_positives = hat.iter().filter(|k| truth.binary_search(k).is_err()).count();
    let false_negatives = truth.iter().filter(|k| hat.binary_search(k).is_err()).count();
    let v0 = theta0.vartheta();
    let mae_vartheta = f
        .theta_hat
        .vartheta()
        .iter()
        .zip(&v0)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / v0.len() as f64;
    let mut xi0 = vec![theta0.mu];
    xi0.extend_from_slice(&theta0.gamma);
    Ok(TunedRecord {
        tuning,
        lambda: f.lambda,
        converged: f.converged,
        kkt_residual: f.kkt_residual,
        support: hat.clone(),
        s_hat: f.s_hat,
        exact_recovery: false_positives == 0 && false_negatives == 0,
        false_positives,
        false_negatives,
        mae_vartheta,
        mu_abs_error: (f.theta_hat.mu - theta0.mu).abs(),
        gamma_l1_error: f
            .theta_hat
            .gamma
            .iter()
            .zip(&theta0.gamma)
            .map(|(a, b)| (a - b).abs())
            .sum(),
        excess_risk: excess_risk(&f.theta_hat, theta0, z)?,
        mu_hat: f.theta_hat.mu,
        gamma_hat: f.theta_hat.gamma.clone(),
        covered: xi0.iter().enumerate().map(|(k, &v)| inf.covers(k, v)).collect(),
        ci: inf.ci,
    })
}

impl SimStudyConfig {
    pub fn tune_options(&self) -> TuneOptions {
        TuneOptions {
            path_points: self.path_points,
            path_ratio: self.path_ratio,
            t: self.heuristic_t,
            strict_factor_8: self.strict_factor_8,
            solver: self.solver.clone(),
        }
    }
}

fn tuned_fit(
    tuning: Tuning,
    g: &DirectedGraph,
    z: &EdgeCovariates,
    opts: &TuneOptions,
) -> Result<FitResult> {
    let f = tune_and_fit(tuning, g, z, opts)?.fit;
    if !f.converged {
        return Err(SrgmError::NotConverged {
            kkt: f.kkt_residual,
            iters: f.iters,
        });
    }
    Ok(f)
}

/// Runs every tuning rule on replication `rep` of grid position `arm`.
pub fn run_replication(cfg: &SimStudyConfig, arm: usize, rep: usize) -> Result<RepRecord> {
    let (theta0, z, g) = cfg.sample(arm, rep)?;
    let probs = link_probs(&theta0, &z)?;
    let (min_p, max_p) = probs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let opts = cfg.tune_options();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for &t in &cfg.tuning {
        match tuned_fit(t, &g, &z, &opts).and_then(|f| score(t, &f, &theta0, &g, &z, cfg)) {
            Ok(r) => results.push(r),
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    Ok(RepRecord {
        n: g.n(),
        rep,
        edge_density: g.density(),
        min_p,
        max_p,
        results,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStudyReport {
    pub config: SimStudyConfig,
    /// Ordered by grid position, then replication.
    pub records: Vec<RepRecord>,
}

/// Runs the whole study; replications run on the current rayon pool and are
/// collected in grid and replication order.
pub fn run_study(cfg: &SimStudyConfig) -> Result<SimStudyReport> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|a| (0..cfg.reps).map(move |r| (a, r)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(a, r)| run_replication(cfg, a, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimStudyReport {
        config: cfg.clone(),
        records,
    })
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub n: usize,
    pub tuning: Tuning,
    pub used: usize,
    pub excluded: usize,
    pub mae_vartheta: (f64, f64),
    pub mu_abs_error: (f64, f64),
    pub gamma_l1_error: (f64, f64),
    pub excess_risk: (f64, f64),
    pub exact_recovery: f64,
    /// Fraction of replications with no false positive.
    pub inactive_excluded: f64,
    pub median_false_positives: f64,
    pub median_false_negatives: f64,
    pub median_s_hat: f64,
    pub median_lambda: f64,
    /// Per coordinate of `(mu, gamma)`.
    pub coverage: Vec<f64>,
    pub median_ci_length: Vec<f64>,
}

impl ArmSummary {
    /// Binomial standard deviation of the exact-recovery rate.
    pub fn exact_recovery_sd(&self) -> f64 {
        let p = self.exact_recovery;
        (p * (1.0 - p) / self.used.max(1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySummary {
    pub n: usize,
    pub reps: usize,
    pub median_density: f64,
    pub median_min_p: f64,
    pub median_max_p: f64,
}

impl SimStudyReport {
    pub fn arm(&self, n: usize, tuning: Tuning) -> Option<ArmSummary> {
        let recs: Vec<&RepRecord> = self.records.iter().filter(|r| r.n == n).collect();
        if recs.is_empty() || !self.config.tuning.contains(&tuning) {
            return None;
        }
        let rows: Vec<&TunedRecord> = recs
            .iter()
            .flat_map(|r| r.results.iter().filter(|t| t.tuning == tuning))
            .collect();
        let col = |f: &dyn Fn(&TunedRecord) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let frac = |f: &dyn Fn(&TunedRecord) -> bool| {
            rows.iter().filter(|r| f(r)).count() as f64 / rows.len().max(1) as f64
        };
        let dim = 1 + self.config.gamma.len();
        Some(ArmSummary {
            n,
            tuning,
            used: rows.len(),
            excluded: recs.len() - rows.len(),
            mae_vartheta: mean_sd(&col(&|r| r.mae_vartheta)),
            mu_abs_error: mean_sd(&col(&|r| r.mu_abs_error)),
            gamma_l1_error: mean_sd(&col(&|r| r.gamma_l1_error)),
            excess_risk: mean_sd(&col(&|r| r.excess_risk)),
            exact_recovery: frac(&|r| r.exact_recovery),
            inactive_excluded: frac(&|r| r.false_positives == 0),
            median_false_positives: median(&col(&|r| r.false_positives as f64)),
            median_false_negatives: median(&col(&|r| r.false_negatives as f64)),
            median_s_hat: median(&col(&|r| r.s_hat as f64)),
            median_lambda: median(&col(&|r| r.lambda)),
            coverage: (0..dim).map(|k| frac(&|r| r.covered[k])).collect(),
            median_ci_length: (0..dim)
                .map(|k| median(&col(&|r| r.ci[k][1] - r.ci[k][0])))
                .collect(),
        })
    }

    pub fn density(&self, n: usize) -> Option<DensitySummary> {
        let recs: Vec<&RepRecord> = self.records.iter().filter(|r| r.n == n).collect();
        if recs.is_empty() {
            return None;
        }
        let col = |f: &dyn Fn(&RepRecord) -> f64| recs.iter().map(|r| f(r)).collect::<Vec<f64>>();
        Some(DensitySummary {
            n,
            reps: recs.len(),
            median_density: median(&col(&|r| r.edge_density)),
            median_min_p: median(&col(&|r| r.min_p)),
            median_max_p: median(&col(&|r| r.max_p)),
        })
    }

    fn arms(&self) -> Vec<ArmSummary> {
        self.config
            .n_grid
            .iter()
            .flat_map(|&n| self.config.tuning.iter().filter_map(move |&t| self.arm(n, t)))
            .collect()
    }

    /// `# srgm <version> seed=<seed> config_sha256=<hash>`
    pub fn provenance(&self) -> String {
        provenance_line(self.config.seed, &self.config.hash())
    }

    pub fn write_metrics<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.provenance())?;
        writeln!(
            w,
            "n,tuning,used,excluded,mae_vartheta_mean,mae_vartheta_sd,mu_abs_error_mean,mu_abs_error_sd,gamma_l1_error_mean,gamma_l1_error_sd,excess_risk_mean,excess_risk_sd"
        )?;
        for a in self.arms() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                a.n,
                a.tuning.as_str(),
                a.used,
                a.excluded,
                a.mae_vartheta.0,
                a.mae_vartheta.1,
                a.mu_abs_error.0,
                a.mu_abs_error.1,
                a.gamma_l1_error.0,
                a.gamma_l1_error.1,
                a.excess_risk.0,
                a.excess_risk.1
            )?;
        }
        Ok(())
    }

    pub fn write_coverage<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.provenance())?;
        writeln!(w, "n,tuning,used,parameter,truth,coverage,median_ci_length")?;
        for a in self.arms() {
            let theta0 = self.config.theta0(a.n, self.s0_for(a.n))?;
            let mut truth = vec![theta0.mu];
            truth.extend_from_slice(&theta0.gamma);
            for (k, t) in truth.iter().enumerate() {
                let name = if k == 0 { "mu".to_string() } else { format!("gamma_{k}") };
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    a.n,
                    a.tuning.as_str(),
                    a.used,
                    name,
                    t,
                    a.coverage[k],
                    a.median_ci_length[k]
                )?;
            }
        }
        Ok(())
    }

    pub fn write_selection<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.provenance())?;
        writeln!(
            w,
            "n,tuning,used,excluded,exact_recovery,exact_recovery_sd,inactive_excluded,median_false_positives,median_false_negatives,median_s_hat,median_lambda"
        )?;
        for a in self.arms() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                a.n,
                a.tuning.as_str(),
                a.used,
                a.excluded,
                a.exact_recovery,
                a.exact_recovery_sd(),
                a.inactive_excluded,
                a.median_false_positives,
                a.median_false_negatives,
                a.median_s_hat,
                a.median_lambda
            )?;
        }
        Ok(())
    }

    pub fn write_density<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.provenance())?;
        writeln!(w, "n,reps,median_density,median_min_p,median_max_p")?;
        for &n in &self.config.n_grid {
            if let Some(d) = self.density(n) {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    d.n, d.reps, d.median_density, d.median_min_p, d.median_max_p
                )?;
            }
        }
        Ok(())
    }

    pub fn write_fits<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r).map_err(|e| SrgmError::InvalidInput(e.to_string()))?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Writes `fits.jsonl`, `metrics.csv`, `coverage.csv`, `selection.csv`
    /// and `density.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<std::io::BufWriter<fs::File>> {
            Ok(std::io::BufWriter::new(fs::File::create(dir.join(name))?))
        };
        self.write_fits(open("fits.jsonl")?)?;
        self.write_metrics(open("metrics.csv")?)?;
        self.write_coverage(open("coverage.csv")?)?;
        self.write_selection(open("selection.csv")?)?;
        self.write_density(open("density.csv")?)?;
        Ok(())
    }

    /// Failed (replication, tuning) pairs as `(n, rep, tuning, error)`.
    pub fn failures(&self) -> Vec<(usize, usize, Tuning, String)> {
        self.records
            .iter()
            .flat_map(|r| r.failures.iter().map(move |(t, e)| (r.n, r.rep, *t, e.clone())))
            .collect()
    }

    fn s0_for(&self, n: usize) -> usize {
        let k = self.config.n_grid.iter().position(|&m| m == n).expect("n in grid");
        self.config.s0_schedule[k]
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn provenance_line(seed: u64, config_hash: &str) -> String {
    format!(
        "# srgm {} seed={seed} config_sha256={config_hash}",
        env!("CARGO_PKG_VERSION")
    )
}
