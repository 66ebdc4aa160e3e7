use rand::Rng;

use super::{DirectedGraph, UndirectedView};
use crate::error::{Result, SrgmError};
use crate::model::{sigmoid, EdgeCovariates, Theta};

/// Calls `f` on each index of `0..total` selected independently with
/// probability `p`, jumping between selections with geometric skips.
fn for_each_selected<R: Rng + ?Sized>(total: u64, p: f64, rng: &mut R, mut f: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(f);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut k = 0u64;
    while k < total {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (total - k) as f64 {
            break;
        }
        k += skip as u64;
        f(k);
        k += 1;
    }
}

/// Decodes a linear index over `{(v, w) : w < v}` ordered by `v` then `w`.
fn triangular_pair(k: u64) -> (usize, usize) {
    let mut v = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).floor() as u64;
    while v * (v - 1) / 2 > k {
        v -= 1;
    }
    while (v + 1) * v / 2 <= k {
        v += 1;
    }
    (v as usize, (k - v * (v - 1) / 2) as usize)
}

fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SrgmError::InvalidProbability { what, value: p })
    }
}

/// Erdős–Rényi graph with edge probability `lambda / n`.
pub fn sample_er<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<UndirectedView> {
    let p = lambda / n as f64;
    if !(lambda >= 0.0 && lambda < n as f64) {
        return Err(SrgmError::InvalidProbability {
            what: "Erdős–Rényi edge probability lambda/n",
            value: p,
        });
    }
    let total = (n as u64) * (n as u64).saturating_sub(1) / 2;
    let mut edges = Vec::new();
    for_each_selected(total, p, rng, |k| edges.push(triangular_pair(k)));
    Ok(UndirectedView::from_edges(n, edges))
}

/// Symmetric two-block SBM: nodes `0..n/2` form block 0, the rest block 1.
/// Within-block pairs link with probability `a / n`, between-block pairs with `b / n`.
pub fn sample_sbm2<R: Rng + ?Sized>(
    n: usize,
    a: f64,
    b: f64,
    rng: &mut R,
) -> Result<(UndirectedView, Vec<u8>)> {
    if n == 0 || n % 2 != 0 {
        return Err(SrgmError::InvalidInput(format!(
            "two-block SBM needs an even, positive n (got {n})"
        )));
    }
    let (pa, pb) = (a / n as f64, b / n as f64);
    check_probability("within-block probability a/n", pa)?;
    check_probability("between-block probability b/n", pb)?;
    let h = n / 2;
    let within = (h as u64) * (h as u64 - 1) / 2;
    let mut edges = Vec::new();
    for offset in [0, h] {
        for_each_selected(within, pa, rng, |k| {
            let (v, w) = triangular_pair(k);
            edges.push((offset + v, offset + w));
        });
    }
    for_each_selected((h as u64) * (h as u64), pb, rng, |k| {
        edges.push(((k / h as u64) as usize, h + (k % h as u64) as usize));
    });
    let membership = (0..n).map(|v| u8::from(v >= h)).collect();
    Ok((UndirectedView::from_edges(n, edges), membership))
}

/// Directed graph with each ordered pair linked independently with the
/// model probability, drawn in the global edge order.
pub fn sample_srgm<R: Rng + ?Sized>(
    theta: &Theta,
    z: &EdgeCovariates,
    rng: &mut R,
) -> Result<DirectedGraph> {
    theta.check_against(z)?;
    let n = theta.n();
    let mut rows = vec![Vec::new(); n];
    for (i, row) in rows.iter_mut().enumerate() {
        for j in (0..n).filter(|&j| j != i) {
            let p = sigmoid(theta.predictor(z, i, j));
            if rng.random::<f64>() < p {
                row.push(j);
            }
        }
    }
    Ok(DirectedGraph::from_sorted_rows(n, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;
    use crate::rng::stream_rng;

    #[test]
    fn triangular_decoding_is_a_bijection() {
        let mut k = 0;
        for v in 1..40usize {
            for w in 0..v {
                assert_eq!(triangular_pair(k), (v, w));
                k += 1;
            }
        }
    }

    #[test]
    fn er_edge_indicator_mean_matches_bernoulli() {
        let (n, lambda) = (200, 30.0);
        let p = lambda / n as f64;
        let pairs = (n * (n - 1) / 2) as f64;
        let mut total = 0.0;
        let reps = 5;
        for r in 0..reps {
            total += sample_er(n, lambda, &mut stream_rng(11, r)).unwrap().num_edges() as f64;
        }
        let draws = pairs * reps as f64;
        let se = (p * (1.0 - p) / draws).sqrt();
        assert!((total / draws - p).abs() < 4.0 * se);
    }

    #[test]
    fn sbm_edge_classes_match_bernoulli_means() {
        let (n, a, b) = (300, 40.0, 10.0);
        let mut within = 0.0;
        let mut between = 0.0;
        let reps = 4;
        for r in 0..reps {
            let (g, m) = sample_sbm2(n, a, b, &mut stream_rng(5, r)).unwrap();
            for (i, j) in g.edges() {
                if m[i] == m[j] {
                    within += 1.0;
                } else {
                    between += 1.0;
                }
            }
        }
        let h = (n / 2) as f64;
        let wp = 2.0 * h * (h - 1.0) / 2.0 * reps as f64;
        let bp = h * h * reps as f64;
        for (count, pairs, p) in [(within, wp, a / n as f64), (between, bp, b / n as f64)] {
            let se = (p * (1.0 - p) / pairs).sqrt();
            assert!((count / pairs - p).abs() < 4.0 * se, "{count} {pairs} {p}");
        }
    }

    #[test]
    fn degenerate_rates() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(sample_er(50, 0.0, &mut rng).unwrap().num_edges(), 0);
        assert!(sample_er(50, 50.0, &mut rng).is_err());
        assert!(sample_er(50, -1.0, &mut rng).is_err());
        let (g, _) = sample_sbm2(10, 0.0, 0.0, &mut rng).unwrap();
        assert_eq!(g.num_edges(), 0);
        let (g, m) = sample_sbm2(10, 10.0, 10.0, &mut rng).unwrap();
        assert_eq!(g.num_edges(), 45);
        assert_eq!(m, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        assert!(sample_sbm2(9, 1.0, 1.0, &mut rng).is_err());
        assert!(sample_sbm2(10, 11.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = sample_er(1000, 2.0, &mut stream_rng(9, 3)).unwrap();
        let b = sample_er(1000, 2.0, &mut stream_rng(9, 3)).unwrap();
        let c = sample_er(1000, 2.0, &mut stream_rng(9, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sbm_with_equal_rates_behaves_like_er() {
        let (n, lambda, reps) = (4000, 2.0, 20);
        let mut er = 0.0;
        let mut sbm = 0.0;
        for r in 0..reps {
            let g = sample_er(n, lambda, &mut stream_rng(21, r)).unwrap();
            er += components(&g).giant_size() as f64 / n as f64;
            let (g, _) = sample_sbm2(n, lambda, lambda, &mut stream_rng(22, r)).unwrap();
            sbm += components(&g).giant_size() as f64 / n as f64;
        }
        assert!((er / reps as f64 - sbm / reps as f64).abs() < 0.02);
    }

    #[test]
    fn srgm_extremes() {
        let z = EdgeCovariates::empty(6);
        let mut theta = Theta::zeros(6, 0);
        theta.mu = -40.0;
        let g = sample_srgm(&theta, &z, &mut stream_rng(2, 0)).unwrap();
        assert_eq!(g.num_edges(), 0);
        let theta = Theta::zeros(40, 0);
        let z = EdgeCovariates::empty(40);
        let g = sample_srgm(&theta, &z, &mut stream_rng(2, 1)).unwrap();
        let p: f64 = 0.5;
        let se = (p * (1.0 - p) / (40.0 * 39.0)).sqrt();
        assert!((g.density() - 0.5).abs() < 4.0 * se);
        assert!(g.edges().all(|(i, j)| i != j));
    }

    #[test]
    fn srgm_rejects_mismatched_covariates() {
        let theta = Theta::zeros(5, 1);
        let z = EdgeCovariates::empty(5);
        assert!(sample_srgm(&theta, &z, &mut stream_rng(0, 0)).is_err());
    }
}
