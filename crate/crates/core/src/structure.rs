//! Structural pattern detection: short circuits, diamonds, reducible
//! subgraphs, 3-edge-cuts, and the seven good collections driving the
//! 2-factor selection.

use std::collections::BTreeSet;

use crate::{rat, rat_usize, Error, Graph, Rat, Result};

// ---------------------------------------------------------------------------
// circuits
// ---------------------------------------------------------------------------

/// A circuit of the graph together with its local context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitPattern {
    /// Cyclic vertex order; starts at the minimal vertex, second < last.
    pub vertices: Vec<usize>,
    /// Edges among circuit vertices that are not circuit edges.
    pub chords: Vec<(usize, usize)>,
    /// Edges with exactly one endpoint on the circuit.
    pub boundary: Vec<(usize, usize)>,
    pub chordless: bool,
    pub independent_boundary: bool,
}

impl CircuitPattern {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_set(&self) -> BTreeSet<usize> {
        self.vertices.iter().copied().collect()
    }

    /// Consecutive pairs, including the closing edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % k]);
                (a.min(b), a.max(b))
            })
            .collect()
    }
}

fn build_pattern(graph: &Graph, cycle: &[usize]) -> CircuitPattern {
    let set: BTreeSet<usize> = cycle.iter().copied().collect();
    let cycle_edges: BTreeSet<(usize, usize)> = {
        let k = cycle.len();
        (0..k)
            .map(|i| {
                let (a, b) = (cycle[i], cycle[(i + 1) % k]);
                (a.min(b), a.max(b))
            })
            .collect()
    };
    let mut chords = Vec::new();
    let mut boundary = Vec::new();
    for &v in cycle {
        for &w in graph.neighbors(v) {
            if set.contains(&w) {
                let e = (v.min(w), v.max(w));
                if !cycle_edges.contains(&e) && v < w {
                    chords.push(e);
                }
            } else {
                boundary.push((v.min(w), v.max(w)));
            }
        }
    }
    chords.sort_unstable();
    chords.dedup();
    boundary.sort_unstable();
    let chordless = chords.is_empty();
    let independent_boundary = Graph::edges_independent(&boundary);
    CircuitPattern { vertices: cycle.to_vec(), chords, boundary, chordless, independent_boundary }
}

/// Every circuit of length at most `max_len` (at least 3), each exactly once
/// up to rotation and reflection. Requires a simple graph.
pub fn enumerate_circuits(graph: &Graph, max_len: usize) -> Vec<CircuitPattern> {
    debug_assert!(graph.is_simple());
    let mut out = Vec::new();
    let n = graph.n();
    let mut in_path = vec![false; n];
    let mut path: Vec<usize> = Vec::new();

    fn dfs(
        graph: &Graph,
        start: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        in_path: &mut Vec<bool>,
        out: &mut Vec<CircuitPattern>,
    ) {
        let v = *path.last().unwrap();
        for &w in graph.neighbors(v) {
            if w == start && path.len() >= 3 {
                // canonical orientation: second vertex below last
                if path[1] < path[path.len() - 1] {
                    out.push(build_pattern(graph, path));
                }
            } else if w > start && !in_path[w] && path.len() < max_len {
                path.push(w);
                in_path[w] = true;
                dfs(graph, start, max_len, path, in_path, out);
                in_path[w] = false;
                path.pop();
            }
        }
    }

    for s in 0..n {
        path.clear();
        path.push(s);
        in_path[s] = true;
        dfs(graph, s, max_len, &mut path, &mut in_path, &mut out);
        in_path[s] = false;
    }
    out.sort_by(|a, b| (a.len(), &a.vertices).cmp(&(b.len(), &b.vertices)));
    out
}

/// Induced (chordless) circuits of length at most `max_len`.
pub fn enumerate_short_circuits(graph: &Graph, max_len: usize) -> Vec<CircuitPattern> {
    enumerate_circuits(graph, max_len)
        .into_iter()
        .filter(|c| c.chordless)
        .collect()
}

// ---------------------------------------------------------------------------
// diamonds
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiamondKind {
    D4,
    D6,
    D8,
}

/// A k-circuit with the maximal chord pattern of its class, subject to the
/// exclusion chain d8 over d6 over d4. Deduplicated by vertex set.
#[derive(Clone, Debug)]
pub struct Diamond {
    pub kind: DiamondKind,
    pub vertices: BTreeSet<usize>,
    pub circuit: Vec<usize>,
    pub chords: Vec<(usize, usize)>,
}

pub fn find_diamonds(graph: &Graph) -> Vec<Diamond> {
    let circuits = enumerate_circuits(graph, 8);
    let mut d8: Vec<Diamond> = Vec::new();
    let mut d6: Vec<Diamond> = Vec::new();
    let mut d4: Vec<Diamond> = Vec::new();
    let dedup = |list: &mut Vec<Diamond>, d: Diamond| {
        if !list.iter().any(|x| x.vertices == d.vertices) {
            list.push(d);
        }
    };
    for c in &circuits {
        if c.len() == 8 && c.chords.len() == 3 {
            dedup(
                &mut d8,
                Diamond {
                    kind: DiamondKind::D8,
                    vertices: c.vertex_set(),
                    circuit: c.vertices.clone(),
                    chords: c.chords.clone(),
                },
            );
        }
    }
    for c in &circuits {
        if c.len() == 6 && c.chords.len() >= 2 {
            let vs = c.vertex_set();
            if d8.iter().any(|d| vs.is_subset(&d.vertices)) {
                continue;
            }
            dedup(
                &mut d6,
                Diamond {
                    kind: DiamondKind::D6,
                    vertices: vs,
                    circuit: c.vertices.clone(),
                    chords: c.chords.clone(),
                },
            );
        }
    }
    for c in &circuits {
        if c.len() == 4 && !c.chords.is_empty() {
            let vs = c.vertex_set();
            if d6.iter().any(|d| vs.is_subset(&d.vertices)) {
                continue;
            }
            dedup(
                &mut d4,
                Diamond {
                    kind: DiamondKind::D4,
                    vertices: vs,
                    circuit: c.vertices.clone(),
                    chords: c.chords.clone(),
                },
            );
        }
    }
    let mut all = d4;
    all.extend(d6);
    all.extend(d8);
    all.sort_by(|a, b| (a.kind, a.vertices.clone()).cmp(&(b.kind, b.vertices.clone())));
    all
}

/// Vertices covered by 4-diamonds; drives the diamond rule of the cost ledger.
pub fn four_diamond_vertices(graph: &Graph) -> BTreeSet<usize> {
    find_diamonds(graph)
        .into_iter()
        .filter(|d| d.kind == DiamondKind::D4)
        .flat_map(|d| d.vertices)
        .collect()
}

// ---------------------------------------------------------------------------
// reducible subgraphs
// ---------------------------------------------------------------------------

/// One of the four locally reducible patterns with the role labelling the
/// reductions need.
#[derive(Clone, Debug, serde::Serialize)]
pub enum ReducibleInstance {
    /// 5-circuit `u1..u5` (chord `u2 u5`) with independent boundary;
    /// attachments are the outside neighbours of `u1, u3, u4`.
    Type1 { u: [usize; 5], attach: [usize; 3] },
    /// 8-diamond: 8-circuit with 3 chords; `v1 < v2` are its chord-free
    /// vertices.
    Type2 { circuit: [usize; 8], chords: [(usize, usize); 3], v1: usize, v2: usize },
    /// 7-circuit whose successive order is `u1 u2 u5 u4 u6 u7 u3`, with
    /// chords `u5 u6` and `u4 u7` and an independent boundary. `u[i]` is
    /// role `u_{i+1}`; attachments are the outside neighbours of
    /// `u1, u2, u3`.
    Type3 { u: [usize; 7], attach: [usize; 3] },
    /// 6-circuit `v1..v6` with exactly one chord `v1 v3`.
    Type4 { v: [usize; 6] },
}

impl ReducibleInstance {
    pub fn type_tag(&self) -> u8 {
        match self {
            ReducibleInstance::Type1 { .. } => 1,
            ReducibleInstance::Type2 { .. } => 2,
            ReducibleInstance::Type3 { .. } => 3,
            ReducibleInstance::Type4 { .. } => 4,
        }
    }

    pub fn vertex_set(&self) -> BTreeSet<usize> {
        match self {
            ReducibleInstance::Type1 { u, .. } => u.iter().copied().collect(),
            ReducibleInstance::Type2 { circuit, .. } => circuit.iter().copied().collect(),
            ReducibleInstance::Type3 { u, .. } => u.iter().copied().collect(),
            ReducibleInstance::Type4 { v, .. } => v.iter().copied().collect(),
        }
    }
}

fn outside_neighbor(graph: &Graph, v: usize, inside: &BTreeSet<usize>) -> Option<usize> {
    graph.neighbors(v).iter().copied().find(|w| !inside.contains(w))
}

fn type1_instances(graph: &Graph, circuits: &[CircuitPattern]) -> Vec<ReducibleInstance> {
    let mut out = Vec::new();
    for c in circuits.iter().filter(|c| c.len() == 5 && c.chords.len() == 1) {
        let (a, b) = c.chords[0];
        let k = 5;
        let pos = |x: usize| c.vertices.iter().position(|&v| v == x).unwrap();
        let (pa, pb) = (pos(a), pos(b));
        // the chord of a 5-circuit spans distance 2; u1 sits between its ends
        let dist = (pa + k - pb) % k;
        let (near, far) = if dist == 2 { (pb, pa) } else { (pa, pb) };
        let mid = (near + 1) % k;
        debug_assert_eq!((mid + 1) % k, far);
        let u1 = c.vertices[mid];
        let u2 = c.vertices[near];
        let u5 = c.vertices[far];
        let u3 = c.vertices[(near + k - 1) % k];
        let u4 = c.vertices[(far + 1) % k];
        let inside = c.vertex_set();
        let (Some(v1), Some(v2), Some(v3)) = (
            outside_neighbor(graph, u1, &inside),
            outside_neighbor(graph, u3, &inside),
            outside_neighbor(graph, u4, &inside),
        ) else {
            continue;
        };
        if v1 != v2 && v1 != v3 && v2 != v3 {
            out.push(ReducibleInstance::Type1 { u: [u1, u2, u3, u4, u5], attach: [v1, v2, v3] });
        }
    }
    out
}

fn type2_instances(circuits: &[CircuitPattern]) -> Vec<ReducibleInstance> {
    let mut out: Vec<ReducibleInstance> = Vec::new();
    for c in circuits.iter().filter(|c| c.len() == 8 && c.chords.len() == 3) {
        let chord_cover: BTreeSet<usize> =
            c.chords.iter().flat_map(|&(a, b)| [a, b]).collect();
        let free: Vec<usize> =
            c.vertices.iter().copied().filter(|v| !chord_cover.contains(v)).collect();
        if free.len() != 2 {
            continue;
        }
        let vs = c.vertex_set();
        if out.iter().any(|r| r.vertex_set() == vs) {
            continue;
        }
        out.push(ReducibleInstance::Type2 {
            circuit: c.vertices.clone().try_into().unwrap(),
            chords: c.chords.clone().try_into().unwrap(),
            v1: free[0].min(free[1]),
            v2: free[0].max(free[1]),
        });
    }
    out
}

fn type3_instances(graph: &Graph, circuits: &[CircuitPattern]) -> Vec<ReducibleInstance> {
    let mut out = Vec::new();
    for c in circuits.iter().filter(|c| c.len() == 7 && c.chords.len() == 2) {
        let k = 7;
        let pos = |x: usize| c.vertices.iter().position(|&v| v == x).unwrap();
        // look for a rotation/reflection placing the chords at positions
        // (2,4) and (3,5): the crossing pair over a consecutive run of four
        let mut found = None;
        'orient: for dir in [1usize, k - 1] {
            for rot in 0..k {
                let at = |i: usize| c.vertices[(rot + dir * i) % k];
                let want1 = (at(2).min(at(4)), at(2).max(at(4)));
                let want2 = (at(3).min(at(5)), at(3).max(at(5)));
                let mut chords = [want1, want2];
                chords.sort_unstable();
                if chords.to_vec() == c.chords {
                    found = Some([at(0), at(1), at(6), at(3), at(2), at(4), at(5)]);
                    break 'orient;
                }
            }
        }
        // found = [u1, u2, u3, u4, u5, u6, u7] in role order
        let Some(roles) = found else { continue };
        let _ = pos; // positions only needed implicitly
        let inside = c.vertex_set();
        let (Some(v1), Some(v2), Some(v3)) = (
            outside_neighbor(graph, roles[0], &inside),
            outside_neighbor(graph, roles[1], &inside),
            outside_neighbor(graph, roles[2], &inside),
        ) else {
            continue;
        };
        if v1 != v2 && v1 != v3 && v2 != v3 {
            out.push(ReducibleInstance::Type3 { u: roles, attach: [v1, v2, v3] });
        }
    }
    out
}

fn type4_instances(circuits: &[CircuitPattern]) -> Vec<ReducibleInstance> {
    let mut out = Vec::new();
    for c in circuits.iter().filter(|c| c.len() == 6 && c.chords.len() == 1) {
        let (a, b) = c.chords[0];
        let k = 6;
        let pos = |x: usize| c.vertices.iter().position(|&v| v == x).unwrap();
        let (pa, pb) = (pos(a), pos(b));
        let dist = ((pa + k - pb) % k).min((pb + k - pa) % k);
        if dist != 2 {
            continue;
        }
        // orient so v1 = min(a, b) and v3 is the other chord endpoint
        let v1 = a.min(b);
        let p1 = pos(v1);
        let dir = if c.vertices[(p1 + 2) % k] == a.max(b) { 1 } else { k - 1 };
        let v: Vec<usize> = (0..6).map(|i| c.vertices[(p1 + dir * i) % k]).collect();
        debug_assert_eq!(v[2], a.max(b));
        out.push(ReducibleInstance::Type4 { v: v.try_into().unwrap() });
    }
    out
}

/// First reducible pattern under the order: type 1, 2, 3, 4, then
/// lexicographically smallest vertex set. `None` means irreducible.
pub fn find_reducible(graph: &Graph) -> Option<ReducibleInstance> {
    let circuits = enumerate_circuits(graph, 8);
    let by_type: [Vec<ReducibleInstance>; 4] = [
        type1_instances(graph, &circuits),
        type2_instances(&circuits),
        type3_instances(graph, &circuits),
        type4_instances(&circuits),
    ];
    for group in by_type {
        if let Some(best) = group.into_iter().min_by_key(|r| r.vertex_set()) {
            return Some(best);
        }
    }
    None
}

pub fn is_irreducible(graph: &Graph) -> bool {
    find_reducible(graph).is_none()
}

// ---------------------------------------------------------------------------
// 3-edge-cuts
// ---------------------------------------------------------------------------

/// All edge triples forming a proper boundary cut: the triple equals the
/// boundary of some vertex set (so removal disconnects and each of the three
/// edges crosses the split). Includes the n vertex-star cuts of a cubic
/// graph. Desk-scale only.
pub fn enumerate_3_edge_cuts(graph: &Graph, limit: usize) -> Result<Vec<[(usize, usize); 3]>> {
    if graph.n() > limit {
        return Err(Error::LimitExceeded(format!(
            "3-edge-cut enumeration is limited to n <= {limit} (got n = {}); \
             use decomposition mode, where the cut condition holds by construction",
            graph.n()
        )));
    }
    let edges = graph.edges().to_vec();
    let m = edges.len();
    let mut out = Vec::new();
    let mut comp = vec![0usize; graph.n()];
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let removed = [edges[i], edges[j], edges[k]];
                let ncomp = components_without(graph, &removed, &mut comp);
                if ncomp < 2 {
                    continue;
                }
                if is_boundary_triple(&removed, &comp, ncomp) {
                    out.push(removed);
                }
            }
        }
    }
    Ok(out)
}

fn components_without(
    graph: &Graph,
    removed: &[(usize, usize); 3],
    comp: &mut [usize],
) -> usize {
    let n = graph.n();
    comp.iter_mut().for_each(|c| *c = usize::MAX);
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        stack.push(s);
        while let Some(v) = stack.pop() {
            let mut skip = [0usize; 3]; // per removed edge, copies to skip
            for (idx, &(a, b)) in removed.iter().enumerate() {
                if a == v || b == v {
                    skip[idx] = 1;
                }
            }
            for &w in graph.neighbors(v) {
                let mut skipped = false;
                for (idx, &(a, b)) in removed.iter().enumerate() {
                    if skip[idx] > 0 && (a, b) == (v.min(w), v.max(w)) {
                        skip[idx] -= 1;
                        skipped = true;
                        break;
                    }
                }
                if skipped {
                    continue;
                }
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    next
}

/// True when components admit a 2-colouring with all three removed edges
/// bichromatic, i.e. the triple is exactly the boundary of the colour class.
fn is_boundary_triple(removed: &[(usize, usize); 3], comp: &[usize], ncomp: usize) -> bool {
    if removed.iter().any(|&(a, b)| comp[a] == comp[b]) {
        return false;
    }
    debug_assert!(ncomp <= 4);
    for mask in 0..(1u32 << ncomp) {
        let side = |c: usize| (mask >> c) & 1;
        if removed.iter().all(|&(a, b)| side(comp[a]) != side(comp[b])) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// good collections
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum CollectionKind {
    D4,
    D6,
    C4NoInt,
    C5NoInt,
    C44NoInt,
    C6NoInt,
    C4Int5,
}

pub const ALL_KINDS: [CollectionKind; 7] = [
    CollectionKind::D4,
    CollectionKind::D6,
    CollectionKind::C4NoInt,
    CollectionKind::C5NoInt,
    CollectionKind::C44NoInt,
    CollectionKind::C6NoInt,
    CollectionKind::C4Int5,
];

/// One member subgraph: its vertex set and boundary edges.
#[derive(Clone, Debug)]
pub struct Member {
    pub vertices: BTreeSet<usize>,
    pub boundary: Vec<(usize, usize)>,
}

/// A family of induced subgraphs sharing the vertex count `n_h` and boundary
/// size `b_h`, with the averaging parameters attached.
#[derive(Clone, Debug)]
pub struct GoodCollection {
    pub kind: CollectionKind,
    pub members: Vec<Member>,
    pub n_h: usize,
    pub b_h: usize,
    /// `a = 2 * floor(b / 2)`, the largest even boundary intersection.
    pub a_h: usize,
    pub s_h: Rat,
    pub t_h: Rat,
    pub p_over_n: Rat,
    pub p_h: Rat,
    pub u_h: Rat,
    pub v_h: Rat,
    /// `A = p / (a - 2b/3) * (r - t)` with `r = 13/10`.
    pub a_weight: Rat,
}

pub const RATIO_R: (i64, i64) = (13, 10);

/// `(u, v)` multipliers as a function of the boundary size; `pn` is `p/n`.
pub fn uv_for_b(b: usize, pn: &Rat) -> (Rat, Rat) {
    match b {
        2 => (rat(1, 1), rat(2, 1) * pn),
        4 => (rat(1, 1), rat(2, 1) * pn),
        5 => (rat(1, 1), rat(5, 1) * pn),
        6 => (rat(1, 1), rat(2, 1) * pn),
        7 => (rat(2, 1), rat(7, 1) * pn),
        9 => (rat(1, 1), rat(3, 1) * pn),
        _ => panic!("boundary size {b} outside the good-collection range"),
    }
}

fn collection_params(kind: CollectionKind) -> (usize, usize, Rat, Rat, Rat) {
    // (n_h, b_h, s_h, t_h, p/n)
    match kind {
        CollectionKind::D4 => (4, 2, rat(3, 2), rat(6, 5), rat(1, 1)),
        CollectionKind::D6 => (6, 2, rat(4, 3), rat(5, 4), rat(1, 1)),
        CollectionKind::C4NoInt => (4, 4, rat(3, 2), rat(6, 5), rat(1, 1)),
        CollectionKind::C5NoInt => (5, 5, rat(7, 5), rat(5, 4), rat(1, 1)),
        CollectionKind::C44NoInt => (6, 4, rat(4, 3), rat(6, 5), rat(1, 1)),
        CollectionKind::C6NoInt => (6, 6, rat(4, 3), rat(6, 5), rat(1, 6)),
        CollectionKind::C4Int5 => (4, 4, rat(11, 8), rat(5, 4), rat(1, 1)),
    }
}

fn make_collection(kind: CollectionKind, members: Vec<Member>) -> GoodCollection {
    let (n_h, b_h, s_h, t_h, p_over_n) = collection_params(kind);
    let a_h = 2 * (b_h / 2);
    let p_h = p_over_n.clone() * rat_usize(n_h);
    let (u_h, v_h) = uv_for_b(b_h, &p_over_n);
    let r = rat(RATIO_R.0, RATIO_R.1);
    let denom = rat_usize(a_h) - rat(2, 3) * rat_usize(b_h);
    let a_weight = p_h.clone() / denom * (r - t_h.clone());
    for m in &members {
        assert_eq!(m.vertices.len(), n_h, "member vertex count for {kind:?}");
        assert_eq!(m.boundary.len(), b_h, "member boundary size for {kind:?}");
    }
    GoodCollection { kind, members, n_h, b_h, a_h, s_h, t_h, p_over_n, p_h, u_h, v_h, a_weight }
}

impl GoodCollection {
    /// Right-hand side of the weighted-average bound: `(u s + v t)/(u + v)`.
    pub fn weighted_average(&self) -> Rat {
        (self.u_h.clone() * self.s_h.clone() + self.v_h.clone() * self.t_h.clone())
            / (self.u_h.clone() + self.v_h.clone())
    }
}

/// Circuit `c` touches vertex set `h`: they share a vertex and `c` leaves `h`.
pub fn touches(c: &BTreeSet<usize>, h: &BTreeSet<usize>) -> bool {
    !c.is_disjoint(h) && c.difference(h).next().is_some()
}

/// Builds the seven good collections on an irreducible graph.
pub fn build_collections(graph: &Graph) -> Result<Vec<GoodCollection>> {
    if let Some(r) = find_reducible(graph) {
        return Err(Error::ContractViolation(format!(
            "collections require an irreducible graph; found type-{} pattern at {:?}",
            r.type_tag(),
            r.vertex_set()
        )));
    }
    let circuits = enumerate_circuits(graph, 6);
    let member_of = |vs: &BTreeSet<usize>| Member {
        vertices: vs.clone(),
        boundary: graph.boundary(vs),
    };

    // C* : all induced circuits of length 4 and 5
    let cstar: Vec<BTreeSet<usize>> = circuits
        .iter()
        .filter(|c| c.chordless && (c.len() == 4 || c.len() == 5))
        .map(|c| c.vertex_set())
        .collect();
    let cstar4: Vec<BTreeSet<usize>> = circuits
        .iter()
        .filter(|c| c.chordless && c.len() == 4)
        .map(|c| c.vertex_set())
        .collect();
    let cstar5: Vec<BTreeSet<usize>> = circuits
        .iter()
        .filter(|c| c.chordless && c.len() == 5)
        .map(|c| c.vertex_set())
        .collect();
    let untouched = |h: &BTreeSet<usize>| !cstar.iter().any(|c| touches(c, h));

    let diamonds = find_diamonds(graph);
    let d4_members: Vec<Member> = diamonds
        .iter()
        .filter(|d| d.kind == DiamondKind::D4)
        .map(|d| member_of(&d.vertices))
        .collect();
    let d6_members: Vec<Member> = diamonds
        .iter()
        .filter(|d| d.kind == DiamondKind::D6)
        .map(|d| member_of(&d.vertices))
        .collect();

    // C_4, C_5, C_6: chordless circuits with an independent boundary
    let c_k = |len: usize| -> Vec<&CircuitPattern> {
        circuits
            .iter()
            .filter(|c| c.len() == len && c.chordless && c.independent_boundary)
            .collect()
    };
    let c4noint: Vec<Member> = c_k(4)
        .into_iter()
        .filter(|c| untouched(&c.vertex_set()))
        .map(|c| member_of(&c.vertex_set()))
        .collect();
    let c5noint: Vec<Member> = c_k(5)
        .into_iter()
        .filter(|c| untouched(&c.vertex_set()))
        .map(|c| member_of(&c.vertex_set()))
        .collect();
    let c6noint: Vec<Member> = c_k(6)
        .into_iter()
        .filter(|c| untouched(&c.vertex_set()))
        .map(|c| member_of(&c.vertex_set()))
        .collect();

    // C_44: induced 6-vertex, 7-edge subgraphs made of a 6-circuit and two
    // 4-circuits sharing exactly one edge, i.e. a hexagon with one chord at
    // distance 3 (distance 2 is a type-4 pattern, absent here)
    let mut c44noint: Vec<Member> = Vec::new();
    for c in circuits.iter().filter(|c| c.len() == 6 && c.chords.len() == 1) {
        let (a, b) = c.chords[0];
        let pos = |x: usize| c.vertices.iter().position(|&v| v == x).unwrap();
        let d = {
            let (pa, pb) = (pos(a), pos(b));
            ((pa + 6 - pb) % 6).min((pb + 6 - pa) % 6)
        };
        if d != 3 {
            continue;
        }
        let vs = c.vertex_set();
        if untouched(&vs) && !c44noint.iter().any(|m| m.vertices == vs) {
            c44noint.push(member_of(&vs));
        }
    }

    // C_4-int-5: chordless 4-circuits with independent boundary touching a
    // 5-circuit of C* but no 4-circuit of C*
    let c4int5: Vec<Member> = c_k(4)
        .into_iter()
        .filter(|c| {
            let vs = c.vertex_set();
            cstar5.iter().any(|s| touches(s, &vs)) && !cstar4.iter().any(|s| touches(s, &vs))
        })
        .map(|c| member_of(&c.vertex_set()))
        .collect();

    Ok(vec![
        make_collection(CollectionKind::D4, d4_members),
        make_collection(CollectionKind::D6, d6_members),
        make_collection(CollectionKind::C4NoInt, c4noint),
        make_collection(CollectionKind::C5NoInt, c5noint),
        make_collection(CollectionKind::C44NoInt, c44noint),
        make_collection(CollectionKind::C6NoInt, c6noint),
        make_collection(CollectionKind::C4Int5, c4int5),
    ])
}

/// Per-member boundary intersection size with a 2-factor. Entry `i` is the
/// number of boundary edges of member `i` lying in the factor; always even.
pub fn classify_members(
    col: &GoodCollection,
    factor_edges: &BTreeSet<(usize, usize)>,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(col.members.len());
    for m in &col.members {
        let k = m.boundary.iter().filter(|e| factor_edges.contains(e)).count();
        if k % 2 != 0 || k > col.a_h {
            return Err(Error::InternalInvariant(format!(
                "member {:?} of {:?} has boundary intersection {k}, expected even and <= {}",
                m.vertices, col.kind, col.a_h
            )));
        }
        out.push(k);
    }
    Ok(out)
}

/// Bucket counts `|H^0|, |H^2|, ..., |H^a|` from the per-member sizes.
pub fn bucket_counts(col: &GoodCollection, ks: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; col.a_h / 2 + 1];
    for &k in ks {
        counts[k / 2] += 1;
    }
    counts
}

/// A pairwise-disjoint subfamily of the given vertex sets of size at least a
/// quarter of the family. Greedy first, exact search as fallback; the
/// guarantee exists because the intersection graph has maximum degree 4 and
/// no 5-clique.
pub fn independent_subfamily(sets: &[BTreeSet<usize>]) -> Result<Vec<usize>> {
    let n = sets.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let conflict: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && !sets[i].is_disjoint(&sets[j]))
                .collect()
        })
        .collect();
    let greedy = |order: &[usize]| -> Vec<usize> {
        let mut picked = Vec::new();
        let mut blocked = vec![false; n];
        for &i in order {
            if !blocked[i] {
                picked.push(i);
                for &j in &conflict[i] {
                    blocked[j] = true;
                }
            }
        }
        picked
    };
    let enough = |picked: &[usize]| 4 * picked.len() >= n;
    let canonical: Vec<usize> = (0..n).collect();
    let by_degree = {
        let mut o = canonical.clone();
        o.sort_by_key(|&i| conflict[i].len());
        o
    };
    for order in [&canonical, &by_degree] {
        let picked = greedy(order);
        if enough(&picked) {
            return Ok(picked);
        }
    }
    // exact branch and bound on the intersection graph
    if n <= 128 {
        let mut best: Vec<usize> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        fn search(
            i: usize,
            n: usize,
            conflict: &[Vec<usize>],
            blocked: &mut Vec<u32>,
            current: &mut Vec<usize>,
            best: &mut Vec<usize>,
        ) {
            if current.len() + (n - i) <= best.len() {
                return;
            }
            if i == n {
                if current.len() > best.len() {
                    *best = current.clone();
                }
                return;
            }
            if blocked[i] == 0 {
                current.push(i);
                for &j in &conflict[i] {
                    blocked[j] += 1;
                }
                search(i + 1, n, conflict, blocked, current, best);
                for &j in &conflict[i] {
                    blocked[j] -= 1;
                }
                current.pop();
            }
            search(i + 1, n, conflict, blocked, current, best);
        }
        let mut blocked = vec![0u32; n];
        search(0, n, &conflict, &mut blocked, &mut current, &mut best);
        if enough(&best) {
            return Ok(best);
        }
    }
    Err(Error::InternalInvariant(format!(
        "no independent subfamily of size >= {n}/4 found"
    )))
}

#[cfg(test)]
pub mod tests_support {
    use crate::Graph;

    /// Ring of three 4-diamonds: irreducible, every vertex inside a diamond.
    /// Diamond i occupies vertices 4i..4i+3 as the circuit (4i, 4i+1, 4i+2,
    /// 4i+3) with chord (4i, 4i+2); consecutive diamonds are joined by one
    /// edge between their boundary vertices.
    pub fn diamond_chain_graph() -> Graph {
        let mut edges = Vec::new();
        for i in 0..3 {
            let b = 4 * i;
            edges.extend_from_slice(&[(b, b + 1), (b + 1, b + 2), (b + 2, b + 3), (b, b + 3), (b, b + 2)]);
        }
        edges.extend_from_slice(&[(3, 5), (7, 9), (11, 1)]);
        Graph::new(12, &edges).unwrap()
    }

    /// 10-vertex instance with a hexagon carrying a single distance-2 chord:
    /// one type-4 pattern, nothing else.
    pub fn type4_instance() -> Graph {
        Graph::new(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 0),
                (0, 2),
                (1, 6),
                (3, 7),
                (4, 8),
                (5, 9),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 6),
            ],
        )
        .unwrap()
    }
}
