use nalgebra::DMatrix;

use super::EdgeCovariates;
use crate::error::{Result, SrgmError};

/// How covariate moments enter the Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMode {
    /// Moments of the observed covariates.
    Empirical,
    /// Covariates treated as mean-zero: first-moment blocks vanish and the
    /// second-moment block is estimated by the observed `Z'Z / N`.
    PopulationZeroMean,
}

/// Sample-size adjusted Gram matrix `T^-1 D'D T^-1` with
/// `T = diag(sqrt(n-1) I_2n, sqrt(N) I_{p+1})`, assembled block by block.
pub fn gram_adjusted(z: &EdgeCovariates, n: usize, mode: GramMode) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(SrgmError::InvalidInput(format!("Gram matrix needs n >= 2 (got {n})")));
    }
    if z.n() != n {
        return Err(SrgmError::DimensionMismatch {
            what: "covariate node count",
            expected: n,
            found: z.n(),
        });
    }
    let p = z.p();
    let dim = 2 * n + 1 + p;
    let (nf, pairs) = (n as f64, z.num_pairs() as f64);
    let mu = 2 * n;
    let mut s = DMatrix::zeros(dim, dim);

    for i in 0..n {
        s[(i, i)] = 1.0;
        s[(n + i, n + i)] = 1.0;
        for j in (0..n).filter(|&j| j != i) {
            s[(i, n + j)] = 1.0 / (nf - 1.0);
            s[(n + j, i)] = 1.0 / (nf - 1.0);
        }
        let c = (nf - 1.0) / ((nf - 1.0) * pairs).sqrt();
        for k in [i, n + i] {
            s[(k, mu)] = c;
            s[(mu, k)] = c;
        }
    }
    s[(mu, mu)] = 1.0;

    if p > 0 {
        let mut second = vec![0.0; p * p];
        let mut first = vec![0.0; p];
        let mut out_sum = vec![0.0; n * p];
        let mut in_sum = vec![0.0; n * p];
        let mut k = 0;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let row = z.row(k);
                for a in 0..p {
                    first[a] += row[a];
                    out_sum[i * p + a] += row[a];
                    in_sum[j * p + a] += row[a];
                    for b in 0..p {
                        second[a * p + b] += row[a] * row[b];
                    }
                }
                k += 1;
            }
        }
        for a in 0..p {
            for b in 0..p {
                s[(mu + 1 + a, mu + 1 + b)] = second[a * p + b] / pairs;
            }
        }
        if mode == GramMode::Empirical {
            let scale = ((nf - 1.0) * pairs).sqrt();
            for a in 0..p {
                let g = mu + 1 + a;
                s[(mu, g)] = first[a] / pairs;
                s[(g, mu)] = first[a] / pairs;
                for i in 0..n {
                    s[(i, g)] = out_sum[i * p + a] / scale;
                    s[(g, i)] = s[(i, g)];
                    s[(n + i, g)] = in_sum[i * p + a] / scale;
                    s[(g, n + i)] = s[(n + i, g)];
                }
            }
        }
    }
    Ok(s)
}
