//! Perfect matchings on (sub)cubic graphs: blossom search with forced and
//! forbidden edges, exhaustive enumeration at desk scale, and the exact
//! decomposition of the uniform fractional perfect matching into a convex
//! combination of perfect matchings.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Zero};

use crate::{rat, Error, Graph, Rat, Result};

/// A matching as a sorted set of canonical vertex pairs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    pub edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(mut edges: Vec<(usize, usize)>) -> Matching {
        for e in &mut edges {
            *e = (e.0.min(e.1), e.0.max(e.1));
        }
        edges.sort_unstable();
        Matching { edges }
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Edges pairwise non-adjacent.
    pub fn is_valid(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().all(|&(u, v)| seen.insert(u) && seen.insert(v))
    }

    pub fn is_perfect(&self, n: usize) -> bool {
        self.is_valid() && self.edges.len() * 2 == n
    }
}

// ---------------------------------------------------------------------------
// blossom maximum matching
// ---------------------------------------------------------------------------

/// Maximum matching by Edmonds' blossom contraction; `mate[v]` is the partner
/// of `v` or `usize::MAX`. Deterministic: vertices and neighbours are scanned
/// in increasing order.
fn maximum_matching(adj: &[Vec<usize>]) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let n = adj.len();
    let mut mate = vec![NONE; n];
    // greedy seed to cut down augmentation rounds
    for v in 0..n {
        if mate[v] == NONE {
            for &w in &adj[v] {
                if w != v && mate[w] == NONE {
                    mate[v] = w;
                    mate[w] = v;
                    break;
                }
            }
        }
    }
    let mut parent = vec![NONE; n];
    let mut base = vec![0usize; n];
    let mut used = vec![false; n];
    let mut blossom = vec![false; n];

    fn lca(
        mate: &[usize],
        base: &[usize],
        parent: &[usize],
        mut a: usize,
        mut b: usize,
        n: usize,
    ) -> usize {
        const NONE: usize = usize::MAX;
        let mut seen = vec![false; n];
        loop {
            a = base[a];
            seen[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = parent[mate[a]];
        }
        loop {
            b = base[b];
            if seen[b] {
                return b;
            }
            b = parent[mate[b]];
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn mark_path(
        mate: &[usize],
        base: &[usize],
        parent: &mut [usize],
        blossom: &mut [bool],
        mut v: usize,
        b: usize,
        mut child: usize,
    ) {
        while base[v] != b {
            blossom[base[v]] = true;
            blossom[base[mate[v]]] = true;
            parent[v] = child;
            child = mate[v];
            v = parent[mate[v]];
        }
    }

    for root in 0..n {
        if mate[root] != NONE {
            continue;
        }
        parent.iter_mut().for_each(|p| *p = NONE);
        used.iter_mut().for_each(|u| *u = false);
        for (i, b) in base.iter_mut().enumerate() {
            *b = i;
        }
        used[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut finish = NONE;
        'bfs: while let Some(v) = queue.pop_front() {
            for &to in &adj[v] {
                if base[v] == base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && parent[mate[to]] != NONE) {
                    // odd circuit: contract the blossom
                    let curbase = lca(&mate, &base, &parent, v, to, n);
                    blossom.iter_mut().for_each(|b| *b = false);
                    mark_path(&mate, &base, &mut parent, &mut blossom, v, curbase, to);
                    mark_path(&mate, &base, &mut parent, &mut blossom, to, curbase, v);
                    for i in 0..n {
                        if blossom[base[i]] {
                            base[i] = curbase;
                            if !used[i] {
                                used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if parent[to] == NONE {
                    parent[to] = v;
                    if mate[to] == NONE {
                        finish = to;
                        break 'bfs;
                    }
                    used[mate[to]] = true;
                    queue.push_back(mate[to]);
                }
            }
        }
        // augment along the alternating path ending at `finish`
        let mut v = finish;
        while v != NONE {
            let pv = parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
    mate
}

/// A perfect matching containing all `forced` and none of the `forbidden`
/// edges, or `None`. Forced edges are realised by removing their endpoints
/// before the search.
pub fn find_perfect_matching(
    graph: &Graph,
    forced: &[(usize, usize)],
    forbidden: &[(usize, usize)],
) -> Result<Option<Matching>> {
    let canon = |e: (usize, usize)| (e.0.min(e.1), e.0.max(e.1));
    let forced: Vec<(usize, usize)> = forced.iter().copied().map(canon).collect();
    let forbidden: BTreeSet<(usize, usize)> = forbidden.iter().copied().map(canon).collect();
    if !Graph::edges_independent(&forced) {
        return Err(Error::ContractViolation("forced edges must be pairwise non-adjacent".into()));
    }
    let mut covered = BTreeSet::new();
    for &(u, v) in &forced {
        if !graph.has_edge(u, v) {
            return Err(Error::ContractViolation(format!("forced edge ({u}, {v}) not in graph")));
        }
        if forbidden.contains(&(u, v)) {
            return Err(Error::ContractViolation(format!(
                "edge ({u}, {v}) both forced and forbidden"
            )));
        }
        covered.insert(u);
        covered.insert(v);
    }
    let n = graph.n();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in graph.edges() {
        if covered.contains(&u) || covered.contains(&v) || forbidden.contains(&(u, v)) {
            continue;
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mate = maximum_matching(&adj);
    let mut edges = forced;
    for v in 0..n {
        if covered.contains(&v) {
            continue;
        }
        let w = mate[v];
        if w == usize::MAX {
            return Ok(None);
        }
        if v < w {
            edges.push((v, w));
        }
    }
    let m = Matching::new(edges);
    debug_assert!(m.is_perfect(n));
    Ok(Some(m))
}

/// Complete duplicate-free list of perfect matchings by branching on the
/// lowest uncovered vertex. Deterministic sorted order.
pub fn enumerate_perfect_matchings(graph: &Graph, limit: usize) -> Result<Vec<Matching>> {
    if graph.n() > limit {
        return Err(Error::LimitExceeded(format!(
            "perfect-matching enumeration is limited to n <= {limit} (got n = {})",
            graph.n()
        )));
    }
    let n = graph.n();
    if n % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut covered = vec![false; n];
    let mut chosen: Vec<(usize, usize)> = Vec::new();

    fn branch(
        graph: &Graph,
        covered: &mut Vec<bool>,
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<Matching>,
    ) {
        let Some(v) = covered.iter().position(|&c| !c) else {
            out.push(Matching::new(chosen.clone()));
            return;
        };
        covered[v] = true;
        let mut tried = BTreeSet::new();
        for &w in graph.neighbors(v) {
            if covered[w] || !tried.insert(w) {
                continue;
            }
            covered[w] = true;
            chosen.push((v, w));
            branch(graph, covered, chosen, out);
            chosen.pop();
            covered[w] = false;
        }
        covered[v] = false;
    }

    branch(graph, &mut covered, &mut chosen, &mut out);
    out.sort();
    out.dedup();
    Ok(out)
}

// ---------------------------------------------------------------------------
// uniform 1/3 decomposition
// ---------------------------------------------------------------------------

/// Exact convex combination of perfect matchings realising the uniform
/// fractional perfect matching (every edge at exactly 1/3).
#[derive(Clone, Debug)]
pub struct FractionalDecomposition {
    pub terms: Vec<(Rat, Matching)>,
}

impl FractionalDecomposition {
    /// Re-verifies the defining identities in exact arithmetic.
    pub fn verify(&self, graph: &Graph) -> Result<()> {
        let third = rat(1, 3);
        let mut total = Rat::zero();
        for (lambda, m) in &self.terms {
            if *lambda <= Rat::zero() {
                return Err(Error::InternalInvariant("non-positive coefficient".into()));
            }
            if !m.is_perfect(graph.n()) {
                return Err(Error::InternalInvariant("non-perfect matching in decomposition".into()));
            }
            total += lambda.clone();
        }
        if !total.is_one() {
            return Err(Error::InternalInvariant(format!("coefficients sum to {total}, not 1")));
        }
        for &(u, v) in graph.edges() {
            let mut s = Rat::zero();
            for (lambda, m) in &self.terms {
                if m.contains(u, v) {
                    s += lambda.clone();
                }
            }
            if s != third {
                return Err(Error::InternalInvariant(format!(
                    "edge ({u}, {v}) has decomposition mass {s}, not 1/3"
                )));
            }
        }
        Ok(())
    }
}

/// Decomposes the all-1/3 point of the perfect matching polytope over the
/// enumerated perfect matchings, solving for nonnegative coefficients by
/// exact rational phase-1 simplex. Desk scale (bounded by `limit`).
pub fn decompose_uniform_third(graph: &Graph, limit: usize) -> Result<FractionalDecomposition> {
    let report = graph.validate();
    if !report.cubic || !report.bridgeless || !report.connected {
        return Err(Error::ContractViolation(
            "uniform decomposition needs a connected bridgeless cubic graph".into(),
        ));
    }
    let matchings = enumerate_perfect_matchings(graph, limit)?;
    if matchings.is_empty() {
        return Err(Error::InternalInvariant("no perfect matching found".into()));
    }
    let edges = graph.edges().to_vec();
    let rows = edges.len();
    let cols = matchings.len();
    // A[i][j] = 1 iff edge i lies in matching j; solve A lambda = 1/3, lambda >= 0
    let mut a = vec![vec![Rat::zero(); cols]; rows];
    for (j, m) in matchings.iter().enumerate() {
        for &(u, v) in &m.edges {
            let i = edges.binary_search(&(u, v)).expect("matching edge must exist");
            a[i][j] = Rat::one();
        }
    }
    let b = vec![rat(1, 3); rows];
    let solution = feasible_point(&a, &b).ok_or_else(|| {
        Error::InternalInvariant(format!(
            "uniform third point not decomposable over {cols} matchings; \
             the input violates the perfect-matching polytope guarantee"
        ))
    })?;
    let terms: Vec<(Rat, Matching)> = solution
        .into_iter()
        .enumerate()
        .filter(|(_, lambda)| !lambda.is_zero())
        .map(|(j, lambda)| (lambda, matchings[j].clone()))
        .collect();
    let decomposition = FractionalDecomposition { terms };
    decomposition.verify(graph)?;
    Ok(decomposition)
}

/// Phase-1 simplex with Bland's rule: a nonnegative solution of `A x = b`
/// (`b >= 0`), or `None` when infeasible. Exact rational arithmetic.
fn feasible_point(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if rows == 0 {
        return Some(Vec::new());
    }
    // tableau: cols real variables, then `rows` artificials, then RHS
    let width = cols + rows + 1;
    let mut t: Vec<Vec<Rat>> = (0..rows)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            row.extend(a[i].iter().cloned());
            for k in 0..rows {
                row.push(if k == i { Rat::one() } else { Rat::zero() });
            }
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    // objective: minimise the sum of artificials; reduced-cost row starts as
    // the sum of all constraint rows with artificial entries cleared
    let mut obj = vec![Rat::zero(); width];
    for row in &t {
        for (o, v) in obj.iter_mut().zip(row.iter()) {
            *o += v.clone();
        }
    }
    for k in cols..cols + rows {
        obj[k] = Rat::zero();
    }
    loop {
        // Bland: smallest column with positive reduced cost
        let Some(enter) = (0..cols + rows).find(|&j| obj[j] > Rat::zero()) else {
            break;
        };
        // ratio test, Bland tie-break on the basis variable index
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for i in 0..rows {
            if t[i][enter] > Rat::zero() {
                let ratio = t[i][width - 1].clone() / t[i][enter].clone();
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        ratio < *cur
                            || (ratio == *cur
                                && basis[i] < basis[leave.expect("leave set with best")])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let leave = leave?; // unbounded cannot happen in phase 1
        // pivot
        let pivot = t[leave][enter].clone();
        for v in t[leave].iter_mut() {
            *v /= pivot.clone();
        }
        for i in 0..rows {
            if i != leave && !t[i][enter].is_zero() {
                let factor = t[i][enter].clone();
                for j in 0..width {
                    let delta = factor.clone() * t[leave][j].clone();
                    t[i][j] -= delta;
                }
            }
        }
        if !obj[enter].is_zero() {
            let factor = obj[enter].clone();
            for j in 0..width {
                let delta = factor.clone() * t[leave][j].clone();
                obj[j] -= delta;
            }
        }
        basis[leave] = enter;
    }
    // feasible iff the artificial objective reached zero
    let z = t
        .iter()
        .enumerate()
        .filter(|(i, _)| basis[*i] >= cols)
        .map(|(_, row)| row[width - 1].clone())
        .fold(Rat::zero(), |acc, v| acc + v);
    if !z.is_zero() {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for i in 0..rows {
        if basis[i] < cols {
            x[basis[i]] = t[i][width - 1].clone();
        }
    }
    Some(x)
}
