//! Undirected multigraph with stable vertex identities.
//!
//! Pipeline inputs are simple, but intermediate contractions and the small
//! Hamiltonian base cases need parallel edges, so edges are stored as a
//! multiset of unordered pairs. Loops are rejected everywhere.

use std::collections::BTreeSet;

use crate::{Error, Result};

/// Reference to one parallel copy of an edge: endpoints plus a slot index
/// distinguishing copies of the same pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef {
    pub u: usize,
    pub v: usize,
    pub slot: usize,
}

/// Validation flags for pipeline admission.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ValidationReport {
    pub connected: bool,
    pub cubic: bool,
    pub simple: bool,
    pub bridgeless: bool,
}

impl ValidationReport {
    pub fn all(&self) -> bool {
        self.connected && self.cubic && self.simple && self.bridgeless
    }
}

/// Undirected multigraph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Canonical edge list: `u <= v` is rejected as a loop, so `u < v`;
    /// parallel edges appear as repeated pairs. Kept sorted.
    edges: Vec<(usize, usize)>,
    /// Adjacency with repeats for parallel edges; each list sorted.
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, normalising edge order. Rejects loops and out-of-range ids.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, edges: norm, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted edge multiset, `u < v` in every pair.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Distinct edges as `EdgeRef`s, slot-indexed per parallel class.
    pub fn edge_refs(&self) -> Vec<EdgeRef> {
        let mut out = Vec::with_capacity(self.edges.len());
        let mut i = 0;
        while i < self.edges.len() {
            let (u, v) = self.edges[i];
            let mut slot = 0;
            while i < self.edges.len() && self.edges[i] == (u, v) {
                out.push(EdgeRef { u, v, slot });
                slot += 1;
                i += 1;
            }
        }
        out
    }

    /// Neighbours of `v` with repeats for parallel edges.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.adj[u].iter().filter(|&&w| w == v).count()
    }

    pub fn is_simple(&self) -> bool {
        self.edges.windows(2).all(|w| w[0] != w[1])
    }

    pub fn is_cubic(&self) -> bool {
        (0..self.n).all(|v| self.degree(v) == 3)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Bridges via iterative DFS low-point computation. Parallel edges are
    /// never bridges; the slot bookkeeping below skips exactly one reverse
    /// traversal per tree edge.
    pub fn bridges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut order = vec![usize::MAX; n];
        let mut low = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = Vec::new();
        // (vertex, parent, parent-edge-used, neighbour cursor)
        let mut stack: Vec<(usize, usize, bool, usize)> = Vec::new();
        for root in 0..n {
            if order[root] != usize::MAX {
                continue;
            }
            order[root] = next;
            low[root] = next;
            next += 1;
            stack.push((root, usize::MAX, true, 0));
            while let Some(&mut (v, parent, ref mut parent_used, ref mut cursor)) =
                stack.last_mut()
            {
                if *cursor < self.adj[v].len() {
                    let w = self.adj[v][*cursor];
                    *cursor += 1;
                    if w == parent && !*parent_used {
                        // first copy of the tree edge back to the parent
                        *parent_used = true;
                        continue;
                    }
                    if order[w] == usize::MAX {
                        order[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push((w, v, false, 0));
                    } else {
                        low[v] = low[v].min(order[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&mut (p, _, _, _)) = stack.last_mut() {
                        low[p] = low[p].min(low[v]);
                        if low[v] > order[p] {
                            out.push((p.min(v), p.max(v)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_bridgeless(&self) -> bool {
        self.bridges().is_empty()
    }

    /// All four admission predicates at once.
    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            connected: self.is_connected(),
            cubic: self.is_cubic(),
            simple: self.is_simple(),
            bridgeless: self.is_bridgeless(),
        }
    }

    /// Contracts the vertex set `s` into a single vertex. Edges inside `s`
    /// vanish; boundary edges keep their multiplicity (so parallel edges may
    /// appear). Returns the contracted graph together with the old-to-new
    /// vertex map; the contracted vertex is the image of every member of `s`.
    pub fn contract_vertex_set(&self, s: &BTreeSet<usize>) -> (Graph, Vec<usize>) {
        assert!(!s.is_empty(), "contraction of an empty set");
        let mut map = vec![usize::MAX; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if !s.contains(&v) {
                map[v] = next;
                next += 1;
            }
        }
        let merged = next;
        for v in 0..self.n {
            if s.contains(&v) {
                map[v] = merged;
            }
        }
        let mut new_edges = Vec::new();
        for &(u, v) in &self.edges {
            let (nu, nv) = (map[u], map[v]);
            if nu != nv {
                new_edges.push((nu, nv));
            }
        }
        let g = Graph::new(merged + 1, &new_edges).expect("contraction preserves validity");
        (g, map)
    }

    /// Deletes a vertex set and splices in extra edges (named in old ids,
    /// endpoints outside the deleted set). Returns the graph and the
    /// old-to-new map, `usize::MAX` for deleted vertices.
    pub fn delete_vertex_set(
        &self,
        s: &BTreeSet<usize>,
        extra_edges: &[(usize, usize)],
    ) -> Result<(Graph, Vec<usize>)> {
        let mut map = vec![usize::MAX; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if !s.contains(&v) {
                map[v] = next;
                next += 1;
            }
        }
        let mut new_edges = Vec::new();
        for &(u, v) in &self.edges {
            if map[u] != usize::MAX && map[v] != usize::MAX {
                new_edges.push((map[u], map[v]));
            }
        }
        for &(u, v) in extra_edges {
            if map[u] == usize::MAX || map[v] == usize::MAX {
                return Err(Error::ContractViolation(format!(
                    "extra edge ({u}, {v}) touches a deleted vertex"
                )));
            }
            new_edges.push((map[u], map[v]));
        }
        Ok((Graph::new(next, &new_edges)?, map))
    }

    /// Boundary of a vertex set: edges with exactly one endpoint inside,
    /// with multiplicity.
    pub fn boundary(&self, s: &BTreeSet<usize>) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(u, v)| s.contains(&u) != s.contains(&v))
            .collect()
    }

    /// True when no two edges of `edges` share an endpoint.
    pub fn edges_independent(edges: &[(usize, usize)]) -> bool {
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if !seen.insert(u) || !seen.insert(v) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    pub fn k4() -> Graph {
        Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn k4_validates() {
        let g = k4();
        let r = g.validate();
        assert!(r.connected && r.cubic && r.simple && r.bridgeless);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn rejects_loops_and_out_of_range() {
        assert!(Graph::new(3, &[(0, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn two_triangles_joined_by_an_edge_have_a_bridge() {
        let g = Graph::new(
            6,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)],
        )
        .unwrap();
        let r = g.validate();
        assert!(!r.bridgeless);
        assert_eq!(g.bridges(), vec![(0, 3)]);
        assert!(r.connected);
        assert!(!r.cubic);
    }

    /// Bridge detector against brute force (remove each edge, test
    /// connectivity) on assorted small graphs.
    #[test]
    fn bridges_agree_with_brute_force() {
        let mut graphs = vec![
            k4(),
            generate::petersen(),
            generate::prism(3).unwrap(),
            generate::prism(4).unwrap(),
            Graph::new(
                6,
                &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)],
            )
            .unwrap(),
            // path of triangles: several bridges
            Graph::new(
                9,
                &[
                    (0, 1),
                    (1, 2),
                    (2, 0),
                    (2, 3),
                    (3, 4),
                    (4, 5),
                    (5, 3),
                    (5, 6),
                    (6, 7),
                    (7, 8),
                    (8, 6),
                ],
            )
            .unwrap(),
        ];
        // multigraph: theta graph plus a pendant triangle via a bridge
        graphs.push(Graph::new(5, &[(0, 1), (0, 1), (0, 1), (1, 2), (2, 3), (3, 4), (4, 2)]).unwrap());
        for g in &graphs {
            let mut brute = Vec::new();
            let refs = g.edge_refs();
            for er in &refs {
                if g.multiplicity(er.u, er.v) > 1 {
                    continue; // a parallel edge is never a bridge
                }
                let remaining: Vec<(usize, usize)> = g
                    .edges()
                    .iter()
                    .copied()
                    .filter(|&e| e != (er.u, er.v))
                    .collect();
                let h = Graph::new(g.n(), &remaining).unwrap();
                // removing an edge from a connected graph; compare component structure
                if g.is_connected() && !h.is_connected() {
                    brute.push((er.u, er.v));
                }
            }
            brute.sort_unstable();
            brute.dedup();
            assert_eq!(g.bridges(), brute);
        }
    }

    #[test]
    fn contract_triangle_of_k4_gives_triple_edge() {
        let g = k4();
        let s: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        let (h, map) = g.contract_vertex_set(&s);
        assert_eq!(h.n(), 2);
        assert_eq!(h.edge_count(), 3);
        assert_eq!(h.multiplicity(0, 1), 3);
        assert_eq!(map[3], 0);
        assert_eq!(map[0], 1);
        assert_eq!(map[1], 1);
    }

    #[test]
    fn contract_everything_gives_single_vertex() {
        let g = k4();
        let s: BTreeSet<usize> = (0..4).collect();
        let (h, _) = g.contract_vertex_set(&s);
        assert_eq!(h.n(), 1);
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        for g in [k4(), generate::petersen(), generate::prism(5).unwrap()] {
            let sum: usize = (0..g.n()).map(|v| g.degree(v)).sum();
            assert_eq!(sum, 2 * g.edge_count());
        }
    }
}
