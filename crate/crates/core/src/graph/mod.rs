//! Directed and undirected graph storage, degree statistics, components and samplers.

mod components;
pub(crate) mod edgelist;
mod sampling;

pub use components::{components, ComponentDecomposition, UnionFind};
pub use edgelist::{read_edge_list, write_edge_list};
pub use sampling::{sample_er, sample_sbm2, sample_srgm};

use crate::error::{Result, SrgmError};

/// Number of ordered pairs `(i, j)`, `i != j`, on `n` nodes.
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1)
}

/// Position of the ordered pair `(i, j)` in the lexicographic edge order that skips `i == j`.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

/// Inverse of [`pair_index`].
#[inline]
pub fn pair_at(n: usize, index: usize) -> (usize, usize) {
    let i = index / (n - 1);
    let r = index % (n - 1);
    (i, if r < i { r } else { r + 1 })
}

/// Simple directed graph on nodes `0..n` in compressed sparse row form.
///
/// Out-neighbour lists are sorted, so membership is a binary search and
/// iteration over a row is linear in the out-degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    in_deg: Vec<usize>,
}

impl DirectedGraph {
    /// Builds a graph from ordered pairs. Self-loops, out-of-range nodes and
    /// repeated pairs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(SrgmError::InvalidInput("graph needs at least one node".into()));
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(SrgmError::InvalidInput(format!(
                    "edge ({i},{j}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(SrgmError::InvalidPair { i });
            }
            rows[i].push(j);
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(SrgmError::InvalidInput(format!(
                    "repeated edge ({i},{})",
                    w[0]
                )));
            }
        }
        Ok(Self::from_sorted_rows(n, rows))
    }

    pub(crate) fn from_sorted_rows(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        let mut in_deg = vec![0; n];
        offsets.push(0);
        for row in rows {
            for &j in &row {
                in_deg[j] += 1;
            }
            targets.extend(row);
            offsets.push(targets.len());
        }
        DirectedGraph {
            n,
            offsets,
            targets,
            in_deg,
        }
    }

    /// Builds a graph from indicators listed in the global edge order.
    pub fn from_indicators(n: usize, a: &[u8]) -> Result<Self> {
        if a.len() != num_pairs(n) {
            return Err(SrgmError::DimensionMismatch {
                what: "edge indicators",
                expected: num_pairs(n),
                found: a.len(),
            });
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && a[pair_index(n, i, j)] != 0)
                    .collect()
            })
            .collect();
        Ok(Self::from_sorted_rows(n, rows))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.out_neighbors(i).binary_search(&j).is_ok()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_deg[i]
    }

    /// Out-degrees `b`, in-degrees `d` and the edge total `d_plus`.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>, usize) {
        let b = (0..self.n).map(|i| self.out_degree(i)).collect();
        (b, self.in_deg.clone(), self.num_edges())
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.out_neighbors(i).iter().map(move |&j| (i, j)))
    }

    /// Adjacency indicators `A_ij` laid out in the global edge order.
    pub fn indicators(&self) -> Vec<u8> {
        let mut a = vec![0u8; num_pairs(self.n)];
        for (i, j) in self.edges() {
            a[pair_index(self.n, i, j)] = 1;
        }
        a
    }

    /// Edge density `|E| / N`.
    pub fn density(&self) -> f64 {
        let pairs = num_pairs(self.n);
        if pairs == 0 {
            0.0
        } else {
            self.num_edges() as f64 / pairs as f64
        }
    }

    /// Undirected view with an edge `{i, j}` whenever either direction is present.
    pub fn symmetrize(&self) -> UndirectedView {
        UndirectedView::from_edges(self.n, self.edges())
    }
}

/// Simple undirected graph with symmetric, sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedView {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl UndirectedView {
    /// Builds the view from unordered pairs; duplicates in either orientation
    /// collapse to one edge and self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in edges {
            assert!(i < n && j < n, "edge ({i},{j}) out of range for n = {n}");
            if i != j {
                rows[i].push(j);
                rows[j].push(i);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            neighbors.extend(row);
            offsets.push(neighbors.len());
        }
        UndirectedView {
            n,
            offsets,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Each edge once, as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_small_graph() {
        let g = DirectedGraph::from_edges(3, &[(0, 1), (1, 0), (0, 2)]).unwrap();
        let (b, d, dp) = g.degrees();
        assert_eq!(b, vec![2, 1, 0]);
        assert_eq!(d, vec![1, 1, 1]);
        assert_eq!(dp, 3);
    }

    #[test]
    fn degrees_empty_and_complete() {
        let g = DirectedGraph::from_edges(4, &[]).unwrap();
        assert_eq!(g.degrees(), (vec![0; 4], vec![0; 4], 0));
        let all: Vec<_> = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let g = DirectedGraph::from_edges(3, &all).unwrap();
        assert_eq!(g.degrees(), (vec![2; 3], vec![2; 3], 6));
    }

    #[test]
    fn rejects_self_loops_and_repeats() {
        assert!(matches!(
            DirectedGraph::from_edges(3, &[(1, 1)]),
            Err(SrgmError::InvalidPair { i: 1 })
        ));
        assert!(DirectedGraph::from_edges(3, &[(0, 1), (0, 1)]).is_err());
        assert!(DirectedGraph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn pair_index_enumerates_lexicographically() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert_eq!(pair_index(n, i, j), k);
                    assert_eq!(pair_at(n, k), (i, j));
                    k += 1;
                }
            }
        }
        assert_eq!(k, num_pairs(n));
    }

    #[test]
    fn indicators_round_trip() {
        let g = DirectedGraph::from_edges(4, &[(0, 3), (2, 1), (3, 0), (1, 2)]).unwrap();
        let a = g.indicators();
        assert_eq!(a.iter().map(|&x| x as usize).sum::<usize>(), 4);
        assert_eq!(DirectedGraph::from_indicators(4, &a).unwrap(), g);
    }

    #[test]
    fn symmetrize_merges_directions() {
        let g = DirectedGraph::from_edges(3, &[(0, 1), (1, 0), (2, 1)]).unwrap();
        let u = g.symmetrize();
        assert_eq!(u.num_edges(), 2);
        assert!(u.has_edge(1, 2) && u.has_edge(2, 1));
        assert_eq!(u.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }
}
