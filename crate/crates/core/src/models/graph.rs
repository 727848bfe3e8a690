//! Edge indexing for complete graphs and a small union-find.

/// Number of edges of K_n.
pub fn complete_edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of edge {i, j} of K_n, i ≠ j, in lexicographic order of (min, max).
#[inline]
pub fn complete_edge_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(b < n && a != b);
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// Inverse of [`complete_edge_index`].
pub fn complete_edge_endpoints(n: usize, mut e: usize) -> (usize, usize) {
    let mut a = 0;
    while e >= n - a - 1 {
        e -= n - a - 1;
        a += 1;
    }
    (a, a + 1 + e)
}

/// Endpoint table for all edges of K_n.
pub fn complete_edge_list(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(complete_edge_count(n));
    for a in 0..n {
        for b in a + 1..n {
            out.push((a, b));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
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

    /// Sizes of all components.
    pub fn component_sizes(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).filter(|&x| self.find(x) == x).collect();
        roots.into_iter().map(|r| self.size[r]).collect()
    }
}
