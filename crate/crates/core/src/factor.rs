//! Selection of the starting 2-factor: complement of a perfect matching
//! minimising the weighted boundary functional `f` over matchings that meet
//! every 3-edge-cut exactly once, with the averaging inequality certificate.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::matching::{self, Matching};
use crate::structure::{self, CollectionKind, GoodCollection};
use crate::{rat, rat_usize, Error, Graph, Rat, Result};

/// Spanning subgraph with every degree exactly 2, stored as the edge set
/// plus its derived circuit partition.
#[derive(Clone, Debug)]
pub struct TwoFactor {
    pub edges: Vec<(usize, usize)>,
    pub circuits: Vec<Vec<usize>>,
}

/// How the 3-edge-cut condition on the selected matching was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CutMode {
    Enumerated,
    ByDecomposition,
}

/// Everything needed to audit the selection after the fact.
#[derive(Clone, Debug)]
pub struct SelectionCertificate {
    pub f_value: Rat,
    /// Averaging bound `(1/3) sum A_H b_H |H|`; `f_value <= f_upper` always.
    pub f_upper: Rat,
    /// `sum_H A_H (2 b |H^0| - (3a - 2b) |H^*|)`; nonpositive for the
    /// selected factor.
    pub inequality: Rat,
    pub buckets: Vec<(CollectionKind, Vec<usize>)>,
    pub cut_mode: CutMode,
    pub candidates: usize,
}

/// Splits an edge set in which every vertex has degree 0 or 2 into circuits
/// and isolated vertices.
pub fn circuits_of(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut isolated = Vec::new();
    let mut circuits = Vec::new();
    let mut seen = vec![false; n];
    for v in 0..n {
        match adj[v].len() {
            0 => isolated.push(v),
            2 => {}
            d => {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} has degree {d} in a would-be even factor"
                )))
            }
        }
    }
    for start in 0..n {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut prev = start;
        let mut cur = adj[start][0].min(adj[start][1]);
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        circuits.push(cycle);
    }
    circuits.sort();
    Ok((circuits, isolated))
}

/// Builds a 2-factor from an explicit edge set, checking degrees.
pub fn two_factor_from_edges(graph: &Graph, edges: &[(usize, usize)]) -> Result<TwoFactor> {
    let set: BTreeSet<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    for &(u, v) in &set {
        if !graph.has_edge(u, v) {
            return Err(Error::InvalidGraph(format!("factor edge ({u}, {v}) not in graph")));
        }
    }
    let (circuits, isolated) = circuits_of(graph.n(), &set)?;
    if !isolated.is_empty() {
        return Err(Error::InvalidGraph(format!(
            "vertex {} is uncovered; a 2-factor must span",
            isolated[0]
        )));
    }
    Ok(TwoFactor { edges: set.into_iter().collect(), circuits })
}

/// The 2-factor complementary to a perfect matching of a cubic graph.
pub fn complement_factor(graph: &Graph, matching: &Matching) -> TwoFactor {
    debug_assert!(matching.is_perfect(graph.n()));
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !matching.contains(u, v))
        .collect();
    two_factor_from_edges(graph, &edges).expect("complement of a perfect matching in a cubic graph")
}

impl TwoFactor {
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    pub fn is_triangle_free(&self) -> bool {
        self.circuits.iter().all(|c| c.len() >= 4)
    }
}

/// Per-edge weight: the sum of `A_H` over all members whose boundary
/// contains the edge. Only nonzero entries are stored.
pub fn edge_weights(collections: &[GoodCollection]) -> BTreeMap<(usize, usize), Rat> {
    let mut weights: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    for col in collections {
        for member in &col.members {
            for &e in &member.boundary {
                *weights.entry(e).or_insert_with(Rat::zero) += col.a_weight.clone();
            }
        }
    }
    weights
}

fn f_of(weights: &BTreeMap<(usize, usize), Rat>, m: &Matching) -> Rat {
    m.edges
        .iter()
        .filter_map(|e| weights.get(e))
        .fold(Rat::zero(), |acc, w| acc + w.clone())
}

/// `sum_H A_H (2 b_H |H^0(F)| - (3 a_H - 2 b_H) |H^*(F)|)`; pure audit.
pub fn verify_lemma4_inequality(collections: &[GoodCollection], factor: &TwoFactor) -> Result<Rat> {
    let edges = factor.edge_set();
    let mut total = Rat::zero();
    for col in collections {
        let ks = structure::classify_members(col, &edges)?;
        let counts = structure::bucket_counts(col, &ks);
        let h0 = counts[0];
        let hstar = counts[col.a_h / 2];
        let term = col.a_weight.clone()
            * (rat(2, 1) * rat_usize(col.b_h) * rat_usize(h0)
                - (rat(3, 1) * rat_usize(col.a_h) - rat(2, 1) * rat_usize(col.b_h))
                    * rat_usize(hstar));
        total += term;
    }
    Ok(total)
}

/// Selection strategy. Exhaustive scans every cut-respecting perfect
/// matching; decomposition scans only the support of the uniform-third
/// convex combination (whose matchings satisfy the cut condition by the
/// parity argument).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectMode {
    Exhaustive,
    Decomposition,
}

pub struct SelectLimits {
    pub enumeration: usize,
    pub cuts: usize,
}

impl Default for SelectLimits {
    fn default() -> Self {
        SelectLimits { enumeration: 24, cuts: 24 }
    }
}

/// Picks the starting 2-factor and emits its certificate. The graph must be
/// irreducible (collections are built on it), simple, cubic, bridgeless.
pub fn select_two_factor(
    graph: &Graph,
    collections: &[GoodCollection],
    mode: SelectMode,
    limits: &SelectLimits,
) -> Result<(TwoFactor, SelectionCertificate)> {
    let weights = edge_weights(collections);
    let (candidates, cut_mode) = match mode {
        SelectMode::Exhaustive => {
            let cuts = structure::enumerate_3_edge_cuts(graph, limits.cuts)?;
            let all = matching::enumerate_perfect_matchings(graph, limits.enumeration)?;
            let filtered: Vec<Matching> = all
                .into_iter()
                .filter(|m| {
                    cuts.iter().all(|cut| {
                        cut.iter().filter(|&&(u, v)| m.contains(u, v)).count() == 1
                    })
                })
                .collect();
            (filtered, CutMode::Enumerated)
        }
        SelectMode::Decomposition => {
            let d = matching::decompose_uniform_third(graph, limits.enumeration)?;
            let ms: Vec<Matching> = d.terms.into_iter().map(|(_, m)| m).collect();
            (ms, CutMode::ByDecomposition)
        }
    };
    if candidates.is_empty() {
        return Err(Error::InternalInvariant(
            "no perfect matching satisfies the 3-edge-cut condition".into(),
        ));
    }
    let n_candidates = candidates.len();
    let best = candidates
        .into_iter()
        .min_by(|a, b| {
            let (fa, fb) = (f_of(&weights, a), f_of(&weights, b));
            fa.cmp(&fb).then_with(|| a.cmp(b))
        })
        .expect("nonempty candidate list");
    let f_value = f_of(&weights, &best);
    let f_upper = collections.iter().fold(Rat::zero(), |acc, col| {
        acc + col.a_weight.clone() * rat_usize(col.b_h) * rat_usize(col.members.len()) / rat(3, 1)
    });
    if f_value > f_upper {
        return Err(Error::InternalInvariant(format!(
            "selected f = {f_value} exceeds the averaging bound {f_upper}"
        )));
    }
    let factor = complement_factor(graph, &best);
    if !factor.is_triangle_free() {
        return Err(Error::InternalInvariant(
            "selected 2-factor contains a triangle despite the cut condition".into(),
        ));
    }
    let edges = factor.edge_set();
    let mut buckets = Vec::new();
    for col in collections {
        let ks = structure::classify_members(col, &edges)?;
        buckets.push((col.kind, structure::bucket_counts(col, &ks)));
    }
    let inequality = verify_lemma4_inequality(collections, &factor)?;
    if inequality > Rat::zero() {
        return Err(Error::InternalInvariant(format!(
            "selected factor violates the averaging inequality: {inequality} > 0"
        )));
    }
    Ok((
        factor,
        SelectionCertificate {
            f_value,
            f_upper,
            inequality,
            buckets,
            cut_mode,
            candidates: n_candidates,
        },
    ))
}

/// A pseudo-random triangle-free 2-factor: complement of the perfect
/// matching found after a seeded relabelling. Testing utility for
/// exercising the swap phases from arbitrary starting factors.
pub fn random_two_factor(graph: &Graph, seed: u64) -> Result<TwoFactor> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let n = graph.n();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let relabeled: Vec<(usize, usize)> =
            graph.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let h = Graph::new(n, &relabeled)?;
        let Some(m) = matching::find_perfect_matching(&h, &[], &[])? else {
            continue;
        };
        let mut inv = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let back: Vec<(usize, usize)> = m.edges.iter().map(|&(u, v)| (inv[u], inv[v])).collect();
        let factor = complement_factor(graph, &Matching::new(back));
        if factor.is_triangle_free() {
            return Ok(factor);
        }
    }
    Err(Error::Infeasible("no triangle-free 2-factor found".into()))
}
