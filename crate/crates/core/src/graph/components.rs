use super::UndirectedView;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Connected components. Component ids are ordered by each component's
/// smallest node index, so id 0 always contains node 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    pub giant_id: usize,
}

impl ComponentDecomposition {
    pub fn giant_size(&self) -> usize {
        self.sizes[self.giant_id]
    }

    /// Node indices of the giant component in increasing order.
    pub fn giant_nodes(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == self.giant_id)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn in_giant(&self, v: usize) -> bool {
        self.labels[v] == self.giant_id
    }
}

pub fn components(g: &UndirectedView) -> ComponentDecomposition {
    let n = g.n();
    let mut uf = UnionFind::new(n);
    for (i, j) in g.edges() {
        uf.union(i, j);
    }
    let mut id_of_root = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut sizes = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = sizes.len();
            sizes.push(0);
        }
        labels[v] = id_of_root[r];
        sizes[labels[v]] += 1;
    }
    // First maximum wins; ids follow smallest node index, which is the tie-break.
    let mut giant_id = 0;
    for (c, &s) in sizes.iter().enumerate() {
        if s > sizes[giant_id] {
            giant_id = c;
        }
    }
    ComponentDecomposition {
        labels,
        sizes,
        giant_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_plus_isolate() {
        let g = UndirectedView::from_edges(4, [(0, 1), (1, 2)]);
        let c = components(&g);
        assert_eq!(c.labels, vec![0, 0, 0, 1]);
        assert_eq!(c.sizes, vec![3, 1]);
        assert_eq!(c.giant_nodes(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_graph_tie_break() {
        let c = components(&UndirectedView::from_edges(3, []));
        assert_eq!(c.sizes, vec![1, 1, 1]);
        assert_eq!(c.giant_nodes(), vec![0]);
    }

    #[test]
    fn equal_sized_components_prefer_smallest_node() {
        let g = UndirectedView::from_edges(6, [(4, 5), (1, 3)]);
        let c = components(&g);
        assert_eq!(c.giant_nodes(), vec![1, 3]);
    }

    fn closure_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut reach = vec![vec![false; n]; n];
        for (v, row) in reach.iter_mut().enumerate() {
            row[v] = true;
        }
        for &(i, j) in edges {
            reach[i][j] = true;
            reach[j][i] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        reach
    }

    proptest! {
        #[test]
        fn matches_transitive_closure(n in 1usize..=12, raw in proptest::collection::vec((0usize..12, 0usize..12), 0..30)) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = UndirectedView::from_edges(n, edges.iter().copied());
            let c = components(&g);
            let reach = closure_components(n, &edges);
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(c.labels[i] == c.labels[j], reach[i][j]);
                }
            }
            prop_assert_eq!(c.sizes.iter().sum::<usize>(), n);
            let max = *c.sizes.iter().max().unwrap();
            prop_assert_eq!(c.giant_size(), max);
            let first_max = (0..n).find(|&v| c.sizes[c.labels[v]] == max).unwrap();
            prop_assert!(c.in_giant(first_max));
        }
    }
}
