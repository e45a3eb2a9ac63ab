//! Incidence and Gaifman graphs, connectivity and the tree test.
//!
//! Both graphs are taken over the base symbols only, so the expansion marks
//! of an expanded structure never change its shape.

use std::collections::BTreeSet;

use crate::signature::SymbolId;
use crate::structure::Structure;

/// Node of an incidence graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IncidenceNode {
    Element(usize),
    /// A tuple, identified by its symbol and position in the sorted relation.
    Tuple {
        symbol: SymbolId,
        index: usize,
    },
}

/// Bipartite multigraph: elements on one side, tuples on the other; one edge
/// per tuple coordinate.
#[derive(Clone, Debug, Default)]
pub struct IncidenceGraph {
    pub elements: usize,
    pub tuples: Vec<(SymbolId, Vec<usize>)>,
    /// `(tuple node, element)` pairs, with multiplicity.
    pub edges: Vec<(usize, usize)>,
}

impl IncidenceGraph {
    pub fn vertex_count(&self) -> usize {
        self.elements + self.tuples.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

pub fn incidence_graph(a: &Structure) -> IncidenceGraph {
    let mut g = IncidenceGraph {
        elements: a.len(),
        ..Default::default()
    };
    for id in a.sig().base_ids() {
        for t in a.relation(id) {
            let node = g.tuples.len();
            g.tuples.push((id, t.clone()));
            for &x in t {
                g.edges.push((node, x));
            }
        }
    }
    g
}

/// Simple graph on the domain; `adj[x]` lists the neighbours of `x` sorted.
pub fn gaifman_graph(a: &Structure) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); a.len()];
    for id in a.sig().base_ids() {
        for t in a.relation(id) {
            for &x in t {
                for &y in t {
                    if x != y {
                        adj[x].insert(y);
                    }
                }
            }
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Connected components of the Gaifman graph restricted to `alive`, each sorted.
pub fn components_within(adj: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || !alive[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            i += 1;
            for &y in &adj[x] {
                if alive[y] && !seen[y] {
                    seen[y] = true;
                    comp.push(y);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn components(a: &Structure) -> Vec<Vec<usize>> {
    components_within(&gaifman_graph(a), &vec![true; a.len()])
}

/// Connectivity of the incidence graph. The empty structure counts as connected.
pub fn is_connected(a: &Structure) -> bool {
    incidence_components(&incidence_graph(a)) <= 1
}

/// Connectivity of the Gaifman graph.
pub fn is_gaifman_connected(a: &Structure) -> bool {
    components(a).len() <= 1
}

fn incidence_components(g: &IncidenceGraph) -> usize {
    let mut uf = UnionFind::new(g.vertex_count());
    for &(t, x) in &g.edges {
        uf.union(g.elements + t, x);
    }
    (0..g.vertex_count()).filter(|&v| uf.find(v) == v).count()
}

/// `Inc(A)` is a tree: connected and acyclic as a multigraph.
pub fn is_tree(a: &Structure) -> bool {
    let g = incidence_graph(a);
    let v = g.vertex_count();
    if v == 0 {
        return false;
    }
    let mut uf = UnionFind::new(v);
    for &(t, x) in &g.edges {
        if !uf.union(g.elements + t, x) {
            return false;
        }
    }
    g.edge_count() + 1 == v
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;
    use crate::structure::sum;

    fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut s = Structure::with_size(Signature::base([("E", 2)]).unwrap(), n);
        for &(a, b) in edges {
            s.add_tuple(0, vec![a, b]).unwrap();
        }
        s
    }

    #[test]
    fn incidence_counts() {
        let g = incidence_graph(&digraph(2, &[(0, 1)]));
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        let l = incidence_graph(&digraph(1, &[(0, 0)]));
        assert_eq!((l.vertex_count(), l.edge_count()), (2, 2));
        let e = incidence_graph(&digraph(0, &[]));
        assert_eq!((e.vertex_count(), e.edge_count()), (0, 0));
    }

    #[test]
    fn gaifman_shapes() {
        let sig = Signature::base([("R", 4)]).unwrap();
        let mut s = Structure::with_size(sig, 3);
        s.add_tuple(0, vec![0, 1, 1, 2]).unwrap();
        assert_eq!(gaifman_graph(&s), vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
        assert_eq!(
            gaifman_graph(&digraph(3, &[(0, 1), (1, 2)])),
            vec![vec![1], vec![0, 2], vec![1]]
        );
        let u = Structure::with_size(Signature::base([("U", 1)]).unwrap(), 3);
        assert!(gaifman_graph(&u).iter().all(|n| n.is_empty()));
    }

    #[test]
    fn connectivity_conventions() {
        assert!(is_connected(&digraph(1, &[])));
        assert!(is_connected(&digraph(0, &[])));
        let a = digraph(1, &[]);
        let (s, _) = sum(a.sig(), &[&a, &a]).unwrap();
        assert!(!is_connected(&s));
    }

    #[test]
    fn tree_test() {
        assert!(is_tree(&digraph(3, &[(0, 1), (1, 2)])));
        assert!(!is_tree(&digraph(1, &[(0, 0)])));
        assert!(!is_tree(&digraph(4, &[(0, 1), (2, 3)])));
        assert!(!is_tree(&digraph(2, &[(0, 1), (1, 0)])));
        assert!(is_tree(&digraph(1, &[])));
    }
}
