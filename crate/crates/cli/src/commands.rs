use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use srgm::bias::{
    bias_curve, er_bias_experiment, linspace, sbm_bias_experiment, write_curve, write_stat_rows,
    StatRow,
};
use srgm::diagnostics::{
    check_compatibility, check_dependency, check_incoherence, lemma_sweep, support_plus,
    write_reports, ConditionReport,
};
use srgm::document::FitDocument;
use srgm::graph::{read_edge_list, write_edge_list};
use srgm::inference::{wald_ci, InferenceConfig};
use srgm::model::{read_covariates, write_covariates, EdgeCovariates, Theta};
use srgm::sim::{provenance_line, run_study, sha256_hex, SimStudyConfig, Tuning};
use srgm::solver::{fit, FitConfig};
use srgm::tuning::{tune_and_fit, TuneOptions};

use crate::{
    BiasCommand, CheckArg, CheckArgs, Cli, CliError, Command, Figure, FitArgs, InstanceArg,
    SampleArgs, SimulateArgs, TuneArg,
};

type Out = Box<dyn Write>;

const DEFAULT_SEED: u64 = 1;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Bias { which } => cmd_bias(cli, which),
        Command::Check(a) => cmd_check(cli, a),
        Command::Sample(a) => cmd_sample(cli, a),
    }
}

fn output(dir: Option<&Path>, name: &str) -> Result<Out, CliError> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            Ok(Box::new(BufWriter::new(File::create(d.join(name))?)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Lib(io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()))
}

fn tuning(t: TuneArg) -> Tuning {
    match t {
        TuneArg::Bic => Tuning::Bic,
        TuneArg::Heuristic => Tuning::Heuristic,
    }
}

fn cmd_fit(cli: &Cli, a: &FitArgs) -> Result<(), CliError> {
    let g = read_edge_list(open(&a.edges)?)?;
    let z = match &a.covariates {
        Some(p) => read_covariates(open(p)?)?,
        None => EdgeCovariates::empty(g.n()),
    };
    if z.n() != g.n() {
        return Err(CliError::Lib(srgm::SrgmError::DimensionMismatch {
            what: "covariate node count",
            expected: g.n(),
            found: z.n(),
        }));
    }
    if let Some(w) = z.centering_warning() {
        eprintln!("srgm: warning: {w}");
    }
    let mut solver = FitConfig::default();
    if let Some(m) = a.max_iters {
        solver.max_iters = m;
    }
    if let Some(t) = a.tol_kkt {
        solver.tol_kkt = t;
    }
    let (f, label) = match a.lambda {
        Some(lambda) => (
            fit(&g, &z, &FitConfig { lambda, ..solver }, None)?,
            "fixed".to_string(),
        ),
        None => {
            let opts = TuneOptions {
                path_points: a.path_points,
                path_ratio: a.path_ratio,
                t: a.t,
                strict_factor_8: a.strict_factor_8,
                solver,
            };
            let t = tuning(a.tune);
            let tuned = tune_and_fit(t, &g, &z, &opts)?;
            for note in &tuned.notes {
                eprintln!("srgm: note: {note}");
            }
            (tuned.fit, t.as_str().to_string())
        }
    };
    let mut numeric_failure = None;
    let inference = if a.no_inference || !f.converged {
        None
    } else {
        let cfg = InferenceConfig {
            level: a.level,
            refit_on_support: a.refit_on_support,
        };
        match wald_ci(&f, &g, &z, &cfg) {
            Ok(r) => Some(r),
            Err(e) => {
                numeric_failure = Some(e);
                None
            }
        }
    };
    let mut doc = FitDocument::new(&f, inference.as_ref());
    doc.tuning = Some(label);
    let mut w = output(cli.out_dir.as_deref(), "fit.json")?;
    writeln!(w, "{}", doc.to_json())?;
    w.flush()?;
    if !f.converged {
        return Err(CliError::NotConverged(format!(
            "fit did not converge (kkt residual {:e} after {} iterations); result written with converged = false",
            f.kkt_residual, f.iters
        )));
    }
    match numeric_failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => SimStudyConfig::from_toml(&fs::read_to_string(p)?)?,
        None if cli.full => SimStudyConfig::full(),
        None => SimStudyConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(v) = &a.n_grid {
        cfg.n_grid = v.clone();
    }
    if let Some(v) = &a.s0 {
        cfg.s0_schedule = v.clone();
    }
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(t) = &a.tuning {
        cfg.tuning = t.iter().map(|&t| tuning(t)).collect();
    }
    if let Some(k) = a.path_points {
        cfg.path_points = k;
    }
    cfg.strict_factor_8 |= a.strict_factor_8;
    cfg.inference.refit_on_support |= a.refit_on_support;
    cfg.validate()?;
    if a.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let dir = cli
        .out_dir
        .clone()
        .unwrap_or_else(|| format!("srgm-sim-{}", &cfg.hash()[..12]).into());
    eprintln!(
        "srgm: simulating n = {:?}, {} replications each, into {}",
        cfg.n_grid,
        cfg.reps,
        dir.display()
    );
    let report = run_study(&cfg)?;
    report.write_dir(&dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let failures = report.failures();
    for (n, rep, t, e) in &failures {
        eprintln!("srgm: excluded n={n} rep={rep} tuning={}: {e}", t.as_str());
    }
    eprintln!("{:>6} {:>10} {:>5} {:>9} {:>10} {:>10} {:>8} {:>8}", "n", "tuning", "used", "excluded", "mae_theta", "gamma_l1", "exact", "cov_g1");
    for &n in &cfg.n_grid {
        for &t in &cfg.tuning {
            if let Some(s) = report.arm(n, t) {
                eprintln!(
                    "{:>6} {:>10} {:>5} {:>9} {:>10.5} {:>10.5} {:>8.3} {:>8.3}",
                    n,
                    t.as_str(),
                    s.used,
                    s.excluded,
                    s.mae_vartheta.0,
                    s.gamma_l1_error.0,
                    s.exact_recovery,
                    s.coverage.get(1).copied().unwrap_or(f64::NAN)
                );
            }
        }
    }
    Ok(())
}

fn write_csv_with_provenance(
    cli: &Cli,
    name: &str,
    seed: u64,
    key: &str,
    body: impl FnOnce(&mut Out) -> srgm::Result<()>,
) -> Result<(), CliError> {
    let mut w = output(cli.out_dir.as_deref(), name)?;
    writeln!(w, "{}", provenance_line(seed, &sha256_hex(key)))?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_bias(cli: &Cli, which: &BiasCommand) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let key = format!("{which:?}");
    match *which {
        BiasCommand::Curve { lmin, lmax, points } => {
            if !(lmin > 1.0 && lmax >= lmin && points >= 1) {
                return Err(CliError::Usage(
                    "curve needs 1 < lmin <= lmax and at least one point".into(),
                ));
            }
            let pts = bias_curve(&linspace(lmin, lmax, points))?;
            write_csv_with_provenance(cli, "bias_curve.csv", seed, &key, |w| write_curve(&pts, w))
        }
        BiasCommand::Er { n, lambda, reps, figure, lmin, lmax, points } => {
            let lambdas = match figure {
                None => vec![lambda],
                Some(Figure::ErBias) => linspace(lmin, lmax, points),
                Some(Figure::SbmGrid) => {
                    return Err(CliError::Usage("--figure sbm-grid belongs to `bias sbm`".into()))
                }
            };
            let mut rows: Vec<StatRow> = Vec::new();
            for l in lambdas {
                let r = er_bias_experiment(n, l, reps, seed)?;
                for w in &r.warnings {
                    eprintln!("srgm: warning: {w}");
                }
                rows.extend(r.rows());
            }
            write_csv_with_provenance(cli, "bias_er.csv", seed, &key, |w| write_stat_rows(&rows, w))
        }
        BiasCommand::Sbm { n, a, b, reps, full_graph, figure, grid_max, grid_step, min_sum } => {
            let pairs = match figure {
                None => vec![(a, b)],
                Some(Figure::SbmGrid) => {
                    if !(grid_step > 0.0 && grid_max > 0.0) {
                        return Err(CliError::Usage("grid needs positive --grid-step and --grid-max".into()));
                    }
                    let k = (grid_max / grid_step).round() as usize;
                    let axis: Vec<f64> = (0..=k).map(|i| i as f64 * grid_step).collect();
                    axis.iter()
                        .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
                        .filter(|&(x, y)| x + y >= min_sum - 1e-12)
                        .collect()
                }
                Some(Figure::ErBias) => {
                    return Err(CliError::Usage("--figure er-bias belongs to `bias er`".into()))
                }
            };
            let mut rows: Vec<StatRow> = Vec::new();
            for (a, b) in pairs {
                let r = sbm_bias_experiment(n, a, b, reps, seed, full_graph)?;
                if r.degenerate > 0 {
                    eprintln!("srgm: a={a} b={b}: {} degenerate replications excluded", r.degenerate);
                }
                rows.extend(r.rows());
            }
            write_csv_with_provenance(cli, "bias_sbm.csv", seed, &key, |w| write_stat_rows(&rows, w))
        }
    }
}

/// Parses `a1,b2` (1-based nodes) into indices of `(alpha, beta)`.
fn parse_support(text: &str, n: usize) -> Result<Vec<usize>, CliError> {
    let text = text.trim();
    if text.is_empty() || text == "none" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        let (offset, rest) = match tok.split_at_checked(1) {
            Some(("a", r)) => (0, r),
            Some(("b", r)) => (n, r),
            _ => return Err(CliError::Usage(format!("support entry `{tok}` must look like a3 or b7"))),
        };
        let i: usize = rest
            .parse()
            .map_err(|_| CliError::Usage(format!("support entry `{tok}` has no node number")))?;
        if i == 0 || i > n {
            return Err(CliError::Usage(format!("support entry `{tok}` outside 1..={n}")));
        }
        out.push(offset + i - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn instance(cli: &Cli, a: &CheckArgs) -> Result<(Theta, EdgeCovariates, Vec<usize>), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match a.instance {
        InstanceArg::Uniform => {
            if a.n < 3 {
                return Err(CliError::Usage("uniform instance needs n >= 3".into()));
            }
            let support = parse_support(&a.support, a.n)?;
            Ok((Theta::zeros(a.n, 0), EdgeCovariates::empty(a.n), support))
        }
        InstanceArg::Template => {
            let cfg = SimStudyConfig {
                n_grid: vec![a.n],
                s0_schedule: vec![a.s0],
                seed,
                ..Default::default()
            };
            let (theta, z, _) = cfg.sample(0, 0)?;
            let s = theta.support(0.0);
            Ok((theta, z, s))
        }
        InstanceArg::File => {
            let (Some(tp), Some(zp)) = (&a.theta, &a.covariates) else {
                return Err(CliError::Usage("--instance file needs --theta and --covariates".into()));
            };
            // Any JSON object with alpha, beta, mu and gamma: a fit document
            // or the truth.json written by `sample`.
            let theta: Theta = serde_json::from_str(&fs::read_to_string(tp)?)
                .map_err(|e| srgm::SrgmError::Parse { line: e.line(), message: e.to_string() })?;
            theta.validate()?;
            let z = read_covariates(open(zp)?)?;
            let s = theta.support(0.0);
            Ok((theta, z, s))
        }
        InstanceArg::Sweep => unreachable!("handled by the caller"),
    }
}

fn cmd_check(cli: &Cli, a: &CheckArgs) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let mut w = output(cli.out_dir.as_deref(), "conditions.jsonl")?;
    if a.instance == InstanceArg::Sweep {
        if matches!(a.check, CheckArg::Compatibility) {
            return Err(CliError::Usage("the sweep covers the dependency and incoherence checks only".into()));
        }
        if a.n_min > a.n_max {
            return Err(CliError::Usage("--n-min exceeds --n-max".into()));
        }
        let s = lemma_sweep(a.count, seed, a.n_min, a.n_max)?;
        serde_json::to_writer(&mut w, &s).map_err(io::Error::from)?;
        writeln!(w)?;
        w.flush()?;
        return Ok(());
    }
    let (theta, z, support) = instance(cli, a)?;
    let mut reports: Vec<ConditionReport> = Vec::new();
    let want = |c: CheckArg| a.check == CheckArg::All || a.check == c;
    if want(CheckArg::Dependency) {
        reports.push(check_dependency(&theta, &z, &support, None)?);
    }
    if want(CheckArg::Incoherence) {
        reports.push(check_incoherence(&theta, &z, &support, None)?);
    }
    if want(CheckArg::Compatibility) {
        let sp = support_plus(&support, z.n(), z.p());
        reports.push(check_compatibility(&z, z.n(), &sp, a.probes, seed, a.c_min)?);
    }
    write_reports(&reports, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_sample(cli: &Cli, a: &SampleArgs) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let cfg = SimStudyConfig {
        n_grid: vec![a.n],
        s0_schedule: vec![a.s0],
        seed,
        ..Default::default()
    };
    cfg.validate()?;
    let (theta, z, g) = cfg.sample(0, a.rep)?;
    let dir = cli
        .out_dir
        .clone()
        .unwrap_or_else(|| format!("srgm-sample-n{}-seed{seed}", a.n).into());
    fs::create_dir_all(&dir)?;
    write_edge_list(&g, BufWriter::new(File::create(dir.join("edges.tsv"))?))?;
    write_covariates(&z, BufWriter::new(File::create(dir.join("covariates.tsv"))?))?;
    let truth = serde_json::json!({
        "n": theta.n(),
        "p": theta.p(),
        "alpha": theta.alpha,
        "beta": theta.beta,
        "mu": theta.mu,
        "gamma": theta.gamma,
        "support": theta.support(0.0),
    });
    fs::write(
        dir.join("truth.json"),
        serde_json::to_string_pretty(&truth).map_err(io::Error::from)? + "\n",
    )?;
    eprintln!(
        "srgm: wrote {} ({} edges, density {:.4})",
        dir.display(),
        g.num_edges(),
        g.density()
    );
    Ok(())
}
