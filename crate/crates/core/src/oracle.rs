//! Desk-scale ground truth: exact graphic-TSP optimum via Held-Karp on the
//! metric closure, and the minimum-cost even factor by exhaustive search.

use std::collections::VecDeque;

use crate::reduce::EvenFactor;
use crate::{Error, Graph, Result};

/// All-pairs distances by BFS (unweighted).
fn distances(graph: &Graph) -> Result<Vec<Vec<usize>>> {
    let n = graph.n();
    let mut dist = vec![vec![usize::MAX; n]; n];
    for s in 0..n {
        dist[s][s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in graph.neighbors(v) {
                if dist[s][w] == usize::MAX {
                    dist[s][w] = dist[s][v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if dist[s].iter().any(|&d| d == usize::MAX) {
            return Err(Error::ContractViolation("oracle needs a connected graph".into()));
        }
    }
    Ok(dist)
}

/// Minimum length of a closed spanning walk: the Held-Karp optimum over the
/// metric closure (the standard equivalence for graphic TSP).
pub fn optimal_graphic_tsp(graph: &Graph, limit: usize) -> Result<usize> {
    let n = graph.n();
    if n > limit {
        return Err(Error::LimitExceeded(format!(
            "exact TSP oracle is limited to n <= {limit} (got {n})"
        )));
    }
    if n == 0 {
        return Ok(0);
    }
    if n == 1 {
        return Ok(0);
    }
    let d = distances(graph)?;
    let full = 1usize << (n - 1); // subsets of 1..n, vertex 0 implicit start
    const INF: u32 = u32::MAX / 2;
    let mut dp = vec![vec![INF; n - 1]; full];
    for v in 1..n {
        dp[1 << (v - 1)][v - 1] = d[0][v] as u32;
    }
    for mask in 1..full {
        for last in 0..n - 1 {
            let cur = dp[mask][last];
            if cur == INF || mask & (1 << last) == 0 {
                continue;
            }
            for next in 0..n - 1 {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = cur + d[last + 1][next + 1] as u32;
                let slot = &mut dp[mask | (1 << next)][next];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }
    let best = (0..n - 1)
        .map(|last| dp[full - 1][last] + d[last + 1][0] as u32)
        .min()
        .expect("n >= 2");
    Ok(best as usize)
}

/// Global minimum of `c(F) = n + 2 |circuits| + |isolated|` over all even
/// factors, by scanning edge subsets with all degrees in {0, 2}.
pub fn min_cost_even_factor(graph: &Graph, limit: usize) -> Result<(EvenFactor, usize)> {
    let n = graph.n();
    if n > limit {
        return Err(Error::LimitExceeded(format!(
            "even-factor oracle is limited to n <= {limit} (got {n})"
        )));
    }
    let edges = graph.edges().to_vec();
    let m = edges.len();
    if m > 24 {
        return Err(Error::LimitExceeded(format!("too many edges ({m}) for subset scan")));
    }
    let mut best: Option<(EvenFactor, usize)> = None;
    for mask in 0u32..(1 << m) {
        let mut deg = vec![0u8; n];
        let mut ok = true;
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[u] += 1;
                deg[v] += 1;
                if deg[u] > 2 || deg[v] > 2 {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || deg.iter().any(|&d| d == 1) {
            continue;
        }
        let chosen: std::collections::BTreeSet<(usize, usize)> = edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let factor = EvenFactor::from_edges(n, &chosen)?;
        let cost = factor.cost();
        if best.as_ref().map_or(true, |(_, c)| cost < *c) {
            best = Some((factor, cost));
        }
    }
    best.ok_or_else(|| Error::InternalInvariant("no even factor found (empty factor always exists)".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn k4() -> Graph {
        Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn k33() -> Graph {
        Graph::new(
            6,
            &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)],
        )
        .unwrap()
    }

    #[test]
    fn hamiltonian_graphs_have_tsp_equal_n() {
        assert_eq!(optimal_graphic_tsp(&k4(), 14).unwrap(), 4);
        assert_eq!(optimal_graphic_tsp(&k33(), 14).unwrap(), 6);
        assert_eq!(optimal_graphic_tsp(&generate::prism(4).unwrap(), 14).unwrap(), 8);
    }

    #[test]
    fn petersen_tsp_optimum_is_eleven() {
        assert_eq!(optimal_graphic_tsp(&generate::petersen(), 14).unwrap(), 11);
    }

    #[test]
    fn min_even_factor_values() {
        let (f, c) = min_cost_even_factor(&k4(), 12).unwrap();
        assert_eq!(c, 6);
        assert_eq!(f.circuits.len(), 1);
        let (f, c) = min_cost_even_factor(&generate::petersen(), 12).unwrap();
        assert_eq!(c, 13); // 9-circuit plus isolated vertex beats two pentagons
        assert_eq!(f.circuits.len(), 1);
        assert_eq!(f.isolated.len(), 1);
    }

    #[test]
    fn even_factor_cost_is_at_least_n_plus_2() {
        for seed in 0..5 {
            let g = generate::random_cubic_bridgeless(10, seed).unwrap();
            let (_, c) = min_cost_even_factor(&g, 12).unwrap();
            assert!(c >= g.n() + 2);
        }
    }

    #[test]
    fn limits_are_enforced() {
        let g = generate::random_cubic_bridgeless(16, 0).unwrap();
        assert!(matches!(optimal_graphic_tsp(&g, 14), Err(Error::LimitExceeded(_))));
        assert!(matches!(min_cost_even_factor(&g, 12), Err(Error::LimitExceeded(_))));
    }
}
