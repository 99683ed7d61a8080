//! Shared test support: exhaustive enumeration of connected cubic graphs at
//! desk scale, and catalog file handling.
//!
//! The enumerator is an orderly search over adjacency columns: vertex `j`'s
//! column records its backward neighbours, the graph string is the
//! concatenation of columns, and only prefixes that are lexicographically
//! maximal over relabellings are extended. Every canonical labelling's
//! prefixes are canonical, so the search is complete and emits each
//! isomorphism class exactly once, already in canonical form.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use cubic_tsp::{format, Graph};

/// Column value of vertex `p` against the partial permutation `perm`:
/// adjacency to `perm[0]` is the most significant bit.
fn column_value(adj: &[u16], v: usize, perm: &[usize]) -> u16 {
    let mut val = 0u16;
    for (q, &w) in perm.iter().enumerate() {
        if adj[v] & (1 << w) != 0 {
            val |= 1 << (perm.len() - 1 - q);
        }
    }
    val
}

/// True when the identity labelling of the prefix on `k` vertices is
/// lexicographically maximal among all relabellings.
fn prefix_is_canonical(adj: &[u16], k: usize, cols: &[u16]) -> bool {
    // depth-first over permutations; prune branches that are already
    // strictly smaller, fail on any strictly greater branch
    fn place(adj: &[u16], k: usize, cols: &[u16], perm: &mut Vec<usize>, used: &mut u16) -> bool {
        let p = perm.len();
        if p == k {
            return true; // an automorphism: equal, keep searching elsewhere
        }
        let mut best = 0u16;
        let mut arg: Vec<usize> = Vec::new();
        for v in 0..k {
            if *used & (1 << v) != 0 {
                continue;
            }
            let val = column_value(adj, v, perm);
            match val.cmp(&best) {
                std::cmp::Ordering::Greater => {
                    best = val;
                    arg.clear();
                    arg.push(v);
                }
                std::cmp::Ordering::Equal => arg.push(v),
                std::cmp::Ordering::Less => {}
            }
        }
        let orig = cols[p];
        if best > orig {
            return false; // found a strictly larger string
        }
        if best < orig {
            return true; // branch is strictly smaller; cannot beat the original
        }
        for v in arg {
            perm.push(v);
            *used |= 1 << v;
            let ok = place(adj, k, cols, perm, used);
            *used &= !(1 << v);
            perm.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    // position 0 has no column; try every start vertex
    let mut perm = Vec::with_capacity(k);
    let mut used = 0u16;
    for v in 0..k {
        perm.push(v);
        used |= 1 << v;
        let ok = place(adj, k, cols, &mut perm, &mut used);
        used &= !(1 << v);
        perm.pop();
        if !ok {
            return false;
        }
    }
    true
}

fn components_and_deficits(adj: &[u16], k: usize) -> (Vec<usize>, Vec<u32>) {
    let mut comp = vec![usize::MAX; k];
    let mut next = 0;
    for s in 0..k {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        while let Some(v) = stack.pop() {
            for w in 0..k {
                if adj[v] & (1 << w) != 0 && comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    let deficits = (0..k).map(|v| 3 - adj[v].count_ones()).collect();
    (comp, deficits)
}

/// All connected simple cubic graphs on `n` vertices, one canonical
/// representative per isomorphism class, deterministically ordered.
pub fn enumerate_connected_cubic(n: usize) -> Vec<Graph> {
    assert!(n <= 14, "enumeration is desk-scale");
    if n < 4 || n % 2 != 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut adj = vec![0u16; n];
    let mut cols = vec![0u16; n];

    fn extend(
        n: usize,
        j: usize,
        adj: &mut Vec<u16>,
        cols: &mut Vec<u16>,
        out: &mut Vec<Graph>,
    ) {
        if j == n {
            let (comp, deficits) = components_and_deficits(adj, n);
            if deficits.iter().any(|&d| d != 0) || comp.iter().any(|&c| c != 0) {
                return;
            }
            let mut edges = Vec::new();
            for v in 0..n {
                for w in v + 1..n {
                    if adj[v] & (1 << w) != 0 {
                        edges.push((v, w));
                    }
                }
            }
            out.push(Graph::new(n, &edges).expect("enumerated graph is valid"));
            return;
        }
        // choose the backward neighbour set of vertex j, highest value first
        let masks: Vec<u16> = (0..(1u16 << j)).rev().collect();
        'mask: for mask in masks {
            if mask.count_ones() > 3 {
                continue;
            }
            for w in 0..j {
                if mask & (1 << w) != 0 && adj[w].count_ones() >= 3 {
                    continue 'mask;
                }
            }
            adj[j] = mask;
            for w in 0..j {
                if mask & (1 << w) != 0 {
                    adj[w] |= 1 << j;
                }
            }
            cols[j] = mask.reverse_bits() >> (16 - j);
            // completability prunes
            let k = j + 1;
            let remaining = (n - k) as u32;
            let (comp, deficits) = components_and_deficits(adj, k);
            let total: u32 = deficits.iter().sum();
            let feasible = total <= 3 * remaining
                && (3 * remaining - total) % 2 == 0
                && deficits.iter().all(|&d| d <= remaining)
                && {
                    // a saturated component must already be the whole graph
                    let ncomp = comp.iter().max().unwrap() + 1;
                    let mut comp_deficit = vec![0u32; ncomp];
                    for v in 0..k {
                        comp_deficit[comp[v]] += deficits[v];
                    }
                    comp_deficit
                        .iter()
                        .all(|&d| d > 0 || (remaining == 0 && ncomp == 1))
                };
            if feasible && prefix_is_canonical(adj, k, cols) {
                extend(n, j + 1, adj, cols, out);
            }
            for w in 0..j {
                if mask & (1 << w) != 0 {
                    adj[w] &= !(1 << j);
                }
            }
            adj[j] = 0;
        }
    }

    extend(n, 1, &mut adj, &mut cols, &mut out);
    out
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn catalog_path(n: usize) -> PathBuf {
    data_dir().join(format!("cubic{n:02}.g6"))
}

/// Reads a graph6 catalog file, one graph per line.
pub fn read_catalog(n: usize) -> Vec<Graph> {
    let text = std::fs::read_to_string(catalog_path(n))
        .unwrap_or_else(|e| panic!("catalog for n = {n} missing: {e}"));
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| format::parse_graph6(l).expect("catalog line parses"))
        .collect()
}

/// The bridgeless members of a catalog.
pub fn bridgeless_catalog(n: usize) -> Vec<Graph> {
    read_catalog(n).into_iter().filter(|g| g.validate().all()).collect()
}

/// Published census of connected simple cubic graphs on 4..14 vertices.
pub const CONNECTED_CUBIC_COUNTS: [(usize, usize); 6] =
    [(4, 1), (6, 2), (8, 5), (10, 19), (12, 85), (14, 509)];

pub fn expected_count(n: usize) -> usize {
    CONNECTED_CUBIC_COUNTS
        .iter()
        .find(|(m, _)| *m == n)
        .map(|(_, c)| *c)
        .expect("count for desk-scale n")
}

/// Distinctness guard: pairwise non-isomorphic via the canonical string.
pub fn all_distinct(graphs: &[Graph]) -> bool {
    let mut seen = BTreeSet::new();
    graphs.iter().all(|g| seen.insert(canonical_string(g)))
}

fn canonical_string(g: &Graph) -> Vec<u16> {
    // brute-force canonical column string; desk-scale n only
    let n = g.n();
    let mut adj = vec![0u16; n];
    for &(u, v) in g.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let mut best: Option<Vec<u16>> = None;
    let mut perm = Vec::with_capacity(n);
    let mut used = 0u16;
    fn go(
        adj: &[u16],
        n: usize,
        perm: &mut Vec<usize>,
        used: &mut u16,
        cur: &mut Vec<u16>,
        best: &mut Option<Vec<u16>>,
    ) {
        let p = perm.len();
        if p == n {
            if best.as_ref().map_or(true, |b| cur as &Vec<u16> > b) {
                *best = Some(cur.clone());
            }
            return;
        }
        let mut top = 0u16;
        let mut arg = Vec::new();
        for v in 0..n {
            if *used & (1 << v) != 0 {
                continue;
            }
            let val = column_value(adj, v, perm);
            match val.cmp(&top) {
                std::cmp::Ordering::Greater => {
                    top = val;
                    arg.clear();
                    arg.push(v);
                }
                std::cmp::Ordering::Equal => arg.push(v),
                std::cmp::Ordering::Less => {}
            }
        }
        for v in arg {
            perm.push(v);
            *used |= 1 << v;
            cur.push(top);
            go(adj, n, perm, used, cur, best);
            cur.pop();
            *used &= !(1 << v);
            perm.pop();
        }
    }
    if n == 0 {
        return Vec::new();
    }
    for v in 0..n {
        perm.push(v);
        used |= 1 << v;
        let mut cur = Vec::new();
        go(&adj, n, &mut perm, &mut used, &mut cur, &mut best);
        used &= !(1 << v);
        perm.pop();
    }
    best.unwrap_or_default()
}
