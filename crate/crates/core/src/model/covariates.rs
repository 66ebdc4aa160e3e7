use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Result, SrgmError};
use crate::graph::edgelist::{parse_header_field, parse_node};
use crate::graph::{num_pairs, pair_at, pair_index};

/// Covariate vectors `Z_ij` for every ordered pair, stored row-major in the
/// global edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCovariates {
    n: usize,
    p: usize,
    values: Vec<f64>,
    c_bound: f64,
}

impl EdgeCovariates {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(SrgmError::InvalidInput("at least two nodes are required".into()));
        }
        if values.len() != num_pairs(n) * p {
            return Err(SrgmError::DimensionMismatch {
                what: "covariate values",
                expected: num_pairs(n) * p,
                found: values.len(),
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(SrgmError::InvalidInput("covariates must be finite".into()));
        }
        let c_bound = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(EdgeCovariates {
            n,
            p,
            values,
            c_bound,
        })
    }

    /// No covariates (`p = 0`).
    pub fn empty(n: usize) -> Self {
        EdgeCovariates {
            n,
            p: 0,
            values: Vec::new(),
            c_bound: 0.0,
        }
    }

    /// Independent `Beta(2,2) - 1/2` draws for every pair and coordinate.
    pub fn sample_centered_beta<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Self {
        let law = Beta::new(2.0, 2.0).expect("valid Beta parameters");
        let values = (0..num_pairs(n) * p)
            .map(|_| law.sample(rng) - 0.5)
            .collect();
        EdgeCovariates::new(n, p, values).expect("sampled covariates are well formed")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_pairs(&self) -> usize {
        num_pairs(self.n)
    }

    /// Largest absolute entry.
    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Covariate vector of the pair at position `k` of the edge order.
    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.p..(k + 1) * self.p]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        self.row(pair_index(self.n, i, j))
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.p];
        for k in 0..self.num_pairs() {
            for (acc, z) in m.iter_mut().zip(self.row(k)) {
                *acc += z;
            }
        }
        let pairs = self.num_pairs() as f64;
        m.iter_mut().for_each(|x| *x /= pairs);
        m
    }

    /// Message when some column mean exceeds 5% of the covariate bound;
    /// the model assumes mean-zero covariates.
    pub fn centering_warning(&self) -> Option<String> {
        let means = self.column_means();
        let limit = 0.05 * self.c_bound;
        let off: Vec<String> = means
            .iter()
            .enumerate()
            .filter(|(_, m)| m.abs() > limit)
            .map(|(k, m)| format!("z{} mean {m:.4}", k + 1))
            .collect();
        (!off.is_empty()).then(|| {
            format!(
                "covariates are not centred ({}; bound {:.4})",
                off.join(", "),
                self.c_bound
            )
        })
    }
}

/// Writes `# n=<n> p=<p>` followed by one `i<TAB>j<TAB>z1...` row per pair.
/// Floats use the shortest representation that parses back to the same value.
pub fn write_covariates<W: Write>(z: &EdgeCovariates, mut w: W) -> Result<()> {
    writeln!(w, "# n={} p={}", z.n, z.p)?;
    for k in 0..z.num_pairs() {
        let (i, j) = pair_at(z.n, k);
        write!(w, "{}\t{}", i + 1, j + 1)?;
        for x in z.row(k) {
            write!(w, "\t{x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_covariates<R: BufRead>(r: R) -> Result<EdgeCovariates> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| SrgmError::parse(1, "empty file, expected `# n=<n> p=<p>` header"))??;
    let header = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| SrgmError::parse(1, "expected `# n=<n> p=<p>` header"))?;
    let n = parse_header_field(header, "n", 1)?;
    let p = parse_header_field(header, "p", 1)?;
    if n < 2 {
        return Err(SrgmError::parse(1, "n must be at least 2"));
    }
    let total = num_pairs(n);
    let mut values = Vec::with_capacity(total * p);
    let mut k = 0;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if k == total {
            return Err(SrgmError::parse(lineno, format!("more than {total} covariate rows")));
        }
        let mut toks = text.split('\t');
        let i = parse_node(toks.next(), n, lineno)?;
        let j = parse_node(toks.next(), n, lineno)?;
        let (ei, ej) = pair_at(n, k);
        if (i, j) != (ei, ej) {
            return Err(SrgmError::parse(
                lineno,
                format!(
                    "expected pair {}\t{} (rows must follow lexicographic order)",
                    ei + 1,
                    ej + 1
                ),
            ));
        }
        let before = values.len();
        for tok in toks {
            let x: f64 = tok
                .parse()
                .map_err(|_| SrgmError::parse(lineno, format!("`{tok}` is not a number")))?;
            if !x.is_finite() {
                return Err(SrgmError::parse(lineno, "covariate is not finite"));
            }
            values.push(x);
        }
        if values.len() - before != p {
            return Err(SrgmError::parse(
                lineno,
                format!("expected {p} covariates, found {}", values.len() - before),
            ));
        }
        k += 1;
    }
    if k != total {
        return Err(SrgmError::InvalidInput(format!(
            "covariate file has {k} rows, expected {total} for n = {n}"
        )));
    }
    EdgeCovariates::new(n, p, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let z = EdgeCovariates::sample_centered_beta(4, 2, &mut stream_rng(1, 0));
        let mut buf = Vec::new();
        write_covariates(&z, &mut buf).unwrap();
        let back = read_covariates(buf.as_slice()).unwrap();
        assert_eq!(back, z);
        let mut again = Vec::new();
        write_covariates(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn beta_draws_are_bounded() {
        let z = EdgeCovariates::sample_centered_beta(30, 2, &mut stream_rng(2, 0));
        assert!(z.c_bound() <= 0.5 && z.c_bound() > 0.3);
        assert!(z.centering_warning().is_none());
        assert!(z.column_means().iter().all(|m| m.abs() < 0.02));
    }

    #[test]
    fn uncentred_covariates_warn() {
        let n = 3;
        let z = EdgeCovariates::new(n, 1, vec![1.0; 6]).unwrap();
        assert!(z.centering_warning().unwrap().contains("z1"));
    }

    #[test]
    fn reader_validates_rows() {
        let err = read_covariates("# n=2 p=1\n1\t2\t0.5\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("1 rows"), "{err}");
        let err = read_covariates("# n=2 p=1\n2\t1\t0.5\n1\t2\t0.1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SrgmError::Parse { line: 2, .. }));
        let err = read_covariates("# n=2 p=1\n1\t2\t0.5\t0.2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SrgmError::Parse { line: 2, .. }));
        let err = read_covariates("# n=2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SrgmError::Parse { line: 1, .. }));
        let ok = read_covariates("# n=2 p=0\n1\t2\n2\t1\n".as_bytes()).unwrap();
        assert_eq!(ok.p(), 0);
    }
}
