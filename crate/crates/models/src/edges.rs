//! Edge addressing for graph-structured model spaces.
//!
//! A graph on p nodes is a binary model of length k = p(p−1)/2; edge e maps
//! to the pair (i, j), i < j, in lexicographic order. The mapping is fixed
//! and documented in output headers.

use mjmc_core::BinaryModel;

#[derive(Clone, Debug)]
pub struct EdgeIndexer {
    p: usize,
    pairs: Vec<(u32, u32)>,
}

impl EdgeIndexer {
    pub fn new(p: usize) -> Self {
        assert!(p >= 2, "a graph needs at least two nodes");
        let mut pairs = Vec::with_capacity(p * (p - 1) / 2);
        for i in 0..p {
            for j in i + 1..p {
                pairs.push((i as u32, j as u32));
            }
        }
        Self { p, pairs }
    }

    pub fn vertex_count(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.pairs.len()
    }

    /// Edge index of the unordered pair {i, j}.
    #[inline]
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.p && j < self.p);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.p - i - 1) / 2 + (j - i - 1)
    }

    /// The (i, j) pair of edge `e`, with i < j.
    #[inline]
    pub fn pair_of(&self, e: usize) -> (u32, u32) {
        self.pairs[e]
    }

    /// Neighbors of `node` in the graph encoded by `g`, ascending.
    pub fn neighbors(&self, node: usize, g: &BinaryModel) -> Vec<u32> {
        debug_assert_eq!(g.len(), self.edge_count());
        let mut out = Vec::new();
        for other in 0..self.p {
            if other != node && g.get(self.index_of(node, other)) {
                out.push(other as u32);
            }
        }
        out
    }
}

/// Copy of a sorted neighbor list with `other` added or removed.
pub(crate) fn toggled_neighbors(nbrs: &[u32], other: u32, add: bool) -> Vec<u32> {
    if add {
        let mut out = Vec::with_capacity(nbrs.len() + 1);
        let pos = nbrs.partition_point(|&x| x < other);
        out.extend_from_slice(&nbrs[..pos]);
        out.push(other);
        out.extend_from_slice(&nbrs[pos..]);
        out
    } else {
        nbrs.iter().copied().filter(|&x| x != other).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bijection_round_trips() {
        let idx = EdgeIndexer::new(7);
        assert_eq!(idx.edge_count(), 21);
        for e in 0..idx.edge_count() {
            let (i, j) = idx.pair_of(e);
            assert!(i < j);
            assert_eq!(idx.index_of(i as usize, j as usize), e);
            assert_eq!(idx.index_of(j as usize, i as usize), e);
        }
        // Lexicographic: (0,1), (0,2), ..., (0,6), (1,2), ...
        assert_eq!(idx.pair_of(0), (0, 1));
        assert_eq!(idx.pair_of(5), (0, 6));
        assert_eq!(idx.pair_of(6), (1, 2));
    }

    #[test]
    fn neighbor_extraction() {
        let idx = EdgeIndexer::new(4);
        // Edges (0,1) and (2,3).
        let mut g = BinaryModel::zeros(idx.edge_count());
        g.flip(idx.index_of(0, 1));
        g.flip(idx.index_of(2, 3));
        assert_eq!(idx.neighbors(0, &g), vec![1]);
        assert_eq!(idx.neighbors(1, &g), vec![0]);
        assert_eq!(idx.neighbors(3, &g), vec![2]);
    }

    #[test]
    fn toggle_keeps_order() {
        assert_eq!(toggled_neighbors(&[1, 5, 9], 3, true), vec![1, 3, 5, 9]);
        assert_eq!(toggled_neighbors(&[1, 5, 9], 5, false), vec![1, 9]);
        assert_eq!(toggled_neighbors(&[], 2, true), vec![2]);
    }
}
