//! Minimal directed graph and rooted-forest reachability.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Directed graph on vertices `0..vertex_count`, parallel edges collapsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    vertex_count: usize,
    out: Vec<BTreeSet<usize>>,
}

impl Digraph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            out: vec![BTreeSet::new(); vertex_count],
        }
    }

    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(vertex_count);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        assert!(from < self.vertex_count && to < self.vertex_count, "edge out of range");
        self.out[from].insert(to);
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[v].iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out[from].contains(&to)
    }
}

/// BFS witness: `parent[v]` is the vertex through which `v` was first reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningForest {
    pub spans: bool,
    pub unreachable: BTreeSet<usize>,
    pub parent: BTreeMap<usize, usize>,
}

/// Whether every non-root vertex is reachable from some root.
///
/// BFS visits roots and successors in ascending order, so the parent map is
/// deterministic.
pub fn has_spanning_forest_rooted_at(g: &Digraph, roots: &BTreeSet<usize>) -> SpanningForest {
    let mut seen = vec![false; g.vertex_count()];
    let mut parent = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &r in roots {
        assert!(r < g.vertex_count(), "root out of range");
        if !seen[r] {
            seen[r] = true;
            queue.push_back(r);
        }
    }
    while let Some(v) = queue.pop_front() {
        for w in g.successors(v) {
            if !seen[w] {
                seen[w] = true;
                parent.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    let unreachable: BTreeSet<usize> = (0..g.vertex_count()).filter(|&v| !seen[v]).collect();
    SpanningForest {
        spans: unreachable.is_empty(),
        unreachable,
        parent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_disjoint_cycles() {
        let g = Digraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let f = has_spanning_forest_rooted_at(&g, &[0].into());
        assert!(!f.spans);
        assert_eq!(f.unreachable, [3, 4, 5].into());
        assert_eq!(f.parent, [(1, 0), (2, 1)].into());
    }

    #[test]
    fn several_roots_and_self_loops() {
        let g = Digraph::from_edges(4, [(0, 0), (0, 1), (3, 2), (2, 2)]);
        let f = has_spanning_forest_rooted_at(&g, &[0, 3].into());
        assert!(f.spans);
        assert_eq!(f.parent, [(1, 0), (2, 3)].into());
        assert!(f.parent.keys().all(|v| ![0, 3].contains(v)));
    }
}
