use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// One step on a root-to-leaf path: the internal node visited and the branch
/// taken out of it (`false` = 0, `true` = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub node: usize,
    pub bit: bool,
}

/// Huffman coding tree over vocabulary counts, for hierarchical softmax.
///
/// A vocabulary of size V gets V-1 internal nodes, indexed `0..V-1` in
/// creation order; the root is the last one. Equal-weight merges take the
/// subtree containing the lower vocabulary index first, and the first
/// popped subtree becomes branch 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    paths: Vec<Vec<PathStep>>,
    internal_nodes: usize,
}

impl HuffmanTree {
    pub fn new(counts: &[u64]) -> Self {
        let leaves = counts.len();
        if leaves <= 1 {
            return HuffmanTree {
                paths: vec![Vec::new(); leaves],
                internal_nodes: 0,
            };
        }
        // (weight, smallest contained leaf, node id); leaves are ids 0..V,
        // internal nodes V.. in creation order.
        let mut heap: BinaryHeap<Reverse<(u64, usize, usize)>> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| Reverse((c, i, i)))
            .collect();
        let mut parent = vec![(usize::MAX, false); 2 * leaves - 1];
        let mut next = leaves;
        while heap.len() > 1 {
            let Reverse((w0, min0, id0)) = heap.pop().expect("len > 1");
            let Reverse((w1, min1, id1)) = heap.pop().expect("len > 1");
            parent[id0] = (next, false);
            parent[id1] = (next, true);
            heap.push(Reverse((w0 + w1, min0.min(min1), next)));
            next += 1;
        }
        let root = next - 1;
        let paths = (0..leaves)
            .map(|leaf| {
                let mut path = Vec::new();
                let mut node = leaf;
                while node != root {
                    let (p, bit) = parent[node];
                    path.push(PathStep {
                        node: p - leaves,
                        bit,
                    });
                    node = p;
                }
                path.reverse();
                path
            })
            .collect();
        HuffmanTree {
            paths,
            internal_nodes: leaves - 1,
        }
    }

    /// Root-first path to `leaf`.
    pub fn path(&self, leaf: usize) -> &[PathStep] {
        &self.paths[leaf]
    }

    pub fn code(&self, leaf: usize) -> Vec<bool> {
        self.paths[leaf].iter().map(|s| s.bit).collect()
    }

    pub fn leaves(&self) -> usize {
        self.paths.len()
    }

    pub fn internal_nodes(&self) -> usize {
        self.internal_nodes
    }

    /// `Σ count(w) · len(code(w))`
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        counts
            .iter()
            .zip(&self.paths)
            .map(|(&c, p)| c * p.len() as u64)
            .sum()
    }
}
