//! Independent reference computations for the integration tests. Nothing here
//! goes through the library's likelihood or solver code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use srgm::graph::{sample_srgm, DirectedGraph};
use srgm::model::{EdgeCovariates, Theta};
use srgm::rng::stream_rng;

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Full design row of pair `(i, j)` in the layout `[alpha, beta, mu, gamma]`.
pub fn design_row(z: &EdgeCovariates, i: usize, j: usize) -> Vec<f64> {
    let n = z.n();
    let p = z.p();
    let mut x = vec![0.0; 2 * n + 1 + p];
    x[i] = 1.0;
    x[n + j] = 1.0;
    x[2 * n] = 1.0;
    x[2 * n + 1..].copy_from_slice(z.get(i, j));
    x
}

/// All `(design row, edge indicator)` pairs.
pub fn dense_data(g: &DirectedGraph, z: &EdgeCovariates) -> Vec<(Vec<f64>, f64)> {
    let n = z.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push((design_row(z, i, j), f64::from(u8::from(g.has_edge(i, j)))));
            }
        }
    }
    out
}

/// Negative log-likelihood by a direct loop over pairs.
pub fn naive_nll(x: &[f64], data: &[(Vec<f64>, f64)]) -> f64 {
    data.iter()
        .map(|(row, a)| {
            let eta: f64 = row.iter().zip(x).map(|(r, v)| r * v).sum();
            softplus(eta) - a * eta
        })
        .sum()
}

/// `NLL / N + lambda * |vartheta|_1` for a point of the orthant.
pub fn naive_objective(x: &[f64], data: &[(Vec<f64>, f64)], n: usize, lambda: f64) -> f64 {
    let l1: f64 = x[..2 * n].iter().map(|v| v.abs()).sum();
    naive_nll(x, data) / data.len() as f64 + lambda * l1
}

/// Newton's method on the face where heterogeneity coordinates in `free`
/// vary and the others are zero. Returns the face minimizer if Newton
/// converges to a point with every free coordinate strictly positive.
fn face_minimum(
    data: &[(Vec<f64>, f64)],
    n: usize,
    dim: usize,
    free: &[usize],
    lambda: f64,
) -> Option<(f64, Vec<f64>)> {
    let vars: Vec<usize> = free.iter().copied().chain(2 * n..dim).collect();
    let m = vars.len();
    let big_n = data.len() as f64;
    let mut x = vec![0.0; dim];
    let value = |x: &[f64]| -> f64 {
        naive_nll(x, data) / big_n + lambda * free.iter().map(|&k| x[k]).sum::<f64>()
    };
    let mut f = value(&x);
    for _ in 0..200 {
        let mut g = DVector::<f64>::zeros(m);
        let mut h = DMatrix::<f64>::zeros(m, m);
        for (row, a) in data {
            let eta: f64 = row.iter().zip(&x).map(|(r, v)| r * v).sum();
            let q = sigmoid(eta);
            let w = q * (1.0 - q);
            for (u, &ku) in vars.iter().enumerate() {
                if row[ku] == 0.0 {
                    continue;
                }
                g[u] += (q - a) * row[ku] / big_n;
                for (v, &kv) in vars.iter().enumerate() {
                    h[(u, v)] += w * row[ku] * row[kv] / big_n;
                }
            }
        }
        for (u, &k) in vars.iter().enumerate() {
            if k < 2 * n {
                g[u] += lambda;
            }
        }
        if g.amax() < 1e-12 {
            break;
        }
        let step = h.clone().cholesky()?.solve(&(-&g));
        let mut t = 1.0;
        loop {
            let mut trial = x.clone();
            for (u, &k) in vars.iter().enumerate() {
                trial[k] += t * step[u];
            }
            let ft = value(&trial);
            if ft <= f + 1e-4 * t * g.dot(&step) {
                x = trial;
                f = ft;
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                return None;
            }
        }
        if !f.is_finite() || f < -1e6 {
            return None;
        }
    }
    // Gradient check after the loop, on the final iterate.
    let mut g = vec![0.0; m];
    for (row, a) in data {
        let eta: f64 = row.iter().zip(&x).map(|(r, v)| r * v).sum();
        let q = sigmoid(eta);
        for (u, &ku) in vars.iter().enumerate() {
            g[u] += (q - a) * row[ku] / big_n;
        }
    }
    for (u, &k) in vars.iter().enumerate() {
        if k < 2 * n {
            g[u] += lambda;
        }
    }
    let ok = g.iter().all(|v| v.abs() < 1e-9) && free.iter().all(|&k| x[k] > 0.0);
    ok.then_some((f, x))
}

/// Global minimum of the penalized objective over the orthant by enumerating
/// all `2^(2n)` faces.
pub fn enumerate_oracle(
    g: &DirectedGraph,
    z: &EdgeCovariates,
    lambda: f64,
) -> Option<(f64, Vec<f64>)> {
    let n = z.n();
    let dim = 2 * n + 1 + z.p();
    let data = dense_data(g, z);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (2 * n)) {
        let free: Vec<usize> = (0..2 * n).filter(|&k| mask >> k & 1 == 1).collect();
        if let Some((f, x)) = face_minimum(&data, n, dim, &free, lambda) {
            if best.as_ref().is_none_or(|b| f < b.0) {
                best = Some((f, x));
            }
        }
    }
    best
}

/// Random small instance for solver checks: `n` in `3..=5`, `p` in `0..=2`.
/// Draws whose null fit has no finite minimizer (separable data) are
/// redrawn; the number of redraws is returned alongside.
pub fn small_instance(seed: u64) -> (DirectedGraph, EdgeCovariates, f64, usize) {
    let mut redraws = 0;
    for attempt in 0.. {
        let mut rng = stream_rng(seed, attempt);
        let n = rng.random_range(3..=5);
        let p = rng.random_range(0..=2);
        let z = EdgeCovariates::sample_centered_beta(n, p, &mut rng);
        let mut theta = Theta::zeros(n, p);
        for k in 0..n {
            if rng.random_bool(0.4) {
                theta.alpha[k] = rng.random_range(0.2..1.5);
            }
            if rng.random_bool(0.4) {
                theta.beta[k] = rng.random_range(0.2..1.5);
            }
        }
        theta.mu = rng.random_range(-1.0..0.3);
        theta.gamma = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = sample_srgm(&theta, &z, &mut rng).unwrap();
        let data = dense_data(&g, &z);
        if face_minimum(&data, n, 2 * n + 1 + p, &[], 0.0).is_none() {
            redraws += 1;
            continue;
        }
        // Penalty between a tenth of and just above the null-fit threshold.
        let lambda = rng.random_range(0.002..0.25);
        return (g, z, lambda, redraws);
    }
    unreachable!()
}

/// Central finite-difference gradient of [`naive_nll`].
pub fn fd_gradient(x: &[f64], data: &[(Vec<f64>, f64)], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[k] += h;
            dn[k] -= h;
            (naive_nll(&up, data) - naive_nll(&dn, data)) / (2.0 * h)
        })
        .collect()
}

/// `eta` solving `eta = exp(-lambda (1 - eta))` in `(0, 1)` by bisection.
pub fn eta_by_bisection(lambda: f64) -> f64 {
    let h = |e: f64| e - (-lambda * (1.0 - e)).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
    // h(0) < 0; the subcritical root sits below the maximizer of h.
    let peak = 1.0 - lambda.ln() / lambda;
    if peak > 0.0 && peak < hi {
        hi = peak;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
