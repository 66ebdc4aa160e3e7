use super::{dot, EdgeCovariates};
use crate::error::{Result, SrgmError};
use crate::graph::DirectedGraph;

/// Negative log-likelihood of one observed graph, evaluated on flat parameter
/// vectors `[alpha, beta, mu, gamma]` without materializing the design matrix.
///
/// With `D` the design matrix and `A` the edge indicators,
/// `L(theta) = sum softplus(D theta) - theta' D'A`; `D'A` is
/// `(b, d, d_plus, sum Z A)` and is computed once.
#[derive(Debug, Clone)]
pub struct Likelihood<'a> {
    n: usize,
    p: usize,
    z: &'a EdgeCovariates,
    suff: Vec<f64>,
}

impl<'a> Likelihood<'a> {
    pub fn new(g: &DirectedGraph, z: &'a EdgeCovariates) -> Result<Self> {
        let n = g.n();
        if z.n() != n {
            return Err(SrgmError::DimensionMismatch {
                what: "covariate node count",
                expected: n,
                found: z.n(),
            });
        }
        let p = z.p();
        let mut suff = vec![0.0; 2 * n + 1 + p];
        for (i, j) in g.edges() {
            suff[i] += 1.0;
            suff[n + j] += 1.0;
            for (s, zk) in suff[2 * n + 1..].iter_mut().zip(z.get(i, j)) {
                *s += zk;
            }
        }
        suff[2 * n] = g.num_edges() as f64;
        Ok(Likelihood { n, p, z, suff })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1 + self.p
    }

    pub fn num_pairs(&self) -> usize {
        self.n * (self.n - 1)
    }

    /// Sufficient statistics `D'A`.
    pub fn sufficient(&self) -> &[f64] {
        &self.suff
    }

    pub fn covariates(&self) -> &EdgeCovariates {
        self.z
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let n = self.n;
        let (beta, mu, gamma) = (&x[n..2 * n], x[2 * n], &x[2 * n + 1..]);
        let mut total = 0.0;
        let mut k = 0;
        for i in 0..n {
            let a = x[i] + mu;
            let mut row = 0.0;
            for (j, &bj) in beta.iter().enumerate() {
                if j == i {
                    continue;
                }
                let eta = a + bj + dot(gamma, self.z.row(k));
                row += eta.max(0.0) + (-eta.abs()).exp().ln_1p();
                k += 1;
            }
            total += row;
        }
        total - dot(x, &self.suff)
    }

    /// Value and gradient in one pass over the pairs.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(grad.len(), self.dim());
        let (n, p) = (self.n, self.p);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (g_alpha, rest) = grad.split_at_mut(n);
        let (g_beta, rest) = rest.split_at_mut(n);
        let (g_mu, g_gamma) = rest.split_at_mut(1);
        let (beta, mu, gamma) = (&x[n..2 * n], x[2 * n], &x[2 * n + 1..]);
        let mut total = 0.0;
        let mut k = 0;
        for i in 0..n {
            let a = x[i] + mu;
            let mut row = 0.0;
            let mut row_prob = 0.0;
            for (j, &bj) in beta.iter().enumerate() {
                if j == i {
                    continue;
                }
                let zk = self.z.row(k);
                let eta = a + bj + dot(gamma, zk);
                let e = (-eta.abs()).exp();
                row += eta.max(0.0) + e.ln_1p();
                let prob = if eta >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
                row_prob += prob;
                g_beta[j] += prob;
                if p > 0 {
                    for (g, z) in g_gamma.iter_mut().zip(zk) {
                        *g += prob * z;
                    }
                }
                k += 1;
            }
            total += row;
            g_alpha[i] = row_prob;
            g_mu[0] += row_prob;
        }
        for (g, s) in grad.iter_mut().zip(&self.suff) {
            *g -= s;
        }
        total - dot(x, &self.suff)
    }

    /// Bernoulli variances `p_ij (1 - p_ij)` in the global edge order.
    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let (beta, mu, gamma) = (&x[n..2 * n], x[2 * n], &x[2 * n + 1..]);
        let mut w = Vec::with_capacity(self.num_pairs());
        let mut k = 0;
        for i in 0..n {
            for (j, &bj) in beta.iter().enumerate() {
                if j == i {
                    continue;
                }
                let eta = x[i] + mu + bj + dot(gamma, self.z.row(k));
                let e = (-eta.abs()).exp();
                w.push(e / ((1.0 + e) * (1.0 + e)));
                k += 1;
            }
        }
        w
    }
}
