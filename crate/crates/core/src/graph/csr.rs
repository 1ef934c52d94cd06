/// Compressed sparse row adjacency. Neighbor lists are sorted and free of
/// duplicates unless built through [`Csr::from_lists_unsorted`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Csr {
    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    /// Builds a symmetric adjacency from undirected edges. Each edge `(u, v)`
    /// is inserted in both directions; lists are sorted.
    pub fn from_undirected(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        for &(u, v) in edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        for i in 0..n {
            targets[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { offsets, targets }
    }

    /// Keeps list order as given.
    pub fn from_lists_unsorted(lists: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Self::from_lists_unsorted(&lists)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn neighbors(&self, n: usize) -> &[usize] {
        &self.targets[self.offsets[n]..self.offsets[n + 1]]
    }

    #[inline]
    pub fn degree(&self, n: usize) -> usize {
        self.offsets[n + 1] - self.offsets[n]
    }

    /// Number of stored (directed) entries.
    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    /// Binary search; requires sorted lists.
    #[inline]
    pub fn contains(&self, n: usize, m: usize) -> bool {
        self.neighbors(n).binary_search(&m).is_ok()
    }

    /// Undirected edges `(u, v)` with `u < v`, in row order.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.nnz() / 2);
        for u in 0..self.len() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Elementwise union of two adjacencies over the same node set.
    pub fn union(&self, other: &Csr) -> Csr {
        assert_eq!(self.len(), other.len());
        let lists = (0..self.len())
            .map(|n| {
                let mut l: Vec<usize> = self.neighbors(n).to_vec();
                l.extend_from_slice(other.neighbors(n));
                l
            })
            .collect();
        Csr::from_lists(lists)
    }
}
