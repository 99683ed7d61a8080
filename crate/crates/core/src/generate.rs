//! Generators for the cubic test families and seeded random instances.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Graph, Result};

/// Family tags accepted by the corpus runner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Petersen,
    Prism(usize),
    GeneralizedPetersen(usize, usize),
    FlowerSnark(usize),
    RandomCubicBridgeless { n: usize, seed: u64 },
}

pub fn generate(family: &Family) -> Result<Graph> {
    match *family {
        Family::Petersen => Ok(petersen()),
        Family::Prism(k) => prism(k),
        Family::GeneralizedPetersen(n, k) => generalized_petersen(n, k),
        Family::FlowerSnark(k) => flower_snark(k),
        Family::RandomCubicBridgeless { n, seed } => random_cubic_bridgeless(n, seed),
    }
}

/// The Petersen graph as GP(5, 2): outer 5-circuit, inner pentagram, spokes.
pub fn petersen() -> Graph {
    generalized_petersen(5, 2).expect("GP(5,2) parameters are valid")
}

/// Prism over a k-gon (circular ladder): vertices `0..k` and `k..2k`.
pub fn prism(k: usize) -> Result<Graph> {
    if k < 3 {
        return Err(Error::Infeasible(format!("prism needs k >= 3, got {k}")));
    }
    let mut edges = Vec::new();
    for i in 0..k {
        let j = (i + 1) % k;
        edges.push((i, j));
        edges.push((k + i, k + j));
        edges.push((i, k + i));
    }
    Graph::new(2 * k, &edges)
}

/// Generalized Petersen graph GP(n, k): outer n-circuit `0..n`, inner
/// vertices `n..2n` with steps of k, and spokes.
pub fn generalized_petersen(n: usize, k: usize) -> Result<Graph> {
    if n < 3 || k == 0 || 2 * k >= n {
        return Err(Error::Infeasible(format!(
            "generalized Petersen needs n >= 3 and 1 <= k < n/2, got ({n}, {k})"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, (i + 1) % n));
        edges.push((i, n + i));
        edges.push((n + i, n + (i + k) % n));
    }
    Graph::new(2 * n, &edges)
}

/// Flower snark J_k for odd k >= 3: k stars whose leaves are tied into one
/// k-circuit and one 2k-circuit.
pub fn flower_snark(k: usize) -> Result<Graph> {
    if k < 3 || k % 2 == 0 {
        return Err(Error::Infeasible(format!(
            "flower snark needs odd k >= 3, got {k}"
        )));
    }
    // vertex layout: centre c_i = i, a_i = k + i, b_i = 2k + i, c-leaf = 3k + i
    let a = |i: usize| k + i;
    let b = |i: usize| 2 * k + i;
    let c = |i: usize| 3 * k + i;
    let mut edges = Vec::new();
    for i in 0..k {
        edges.push((i, a(i)));
        edges.push((i, b(i)));
        edges.push((i, c(i)));
        edges.push((a(i), a((i + 1) % k)));
    }
    // one 2k-circuit: b_0 .. b_{k-1} c_0 .. c_{k-1} b_0
    for i in 0..k - 1 {
        edges.push((b(i), b(i + 1)));
        edges.push((c(i), c(i + 1)));
    }
    edges.push((b(k - 1), c(0)));
    edges.push((c(k - 1), b(0)));
    Graph::new(4 * k, &edges)
}

/// Random simple connected bridgeless cubic graph by the pairing model with
/// rejection. Deterministic for a fixed `(n, seed)`.
pub fn random_cubic_bridgeless(n: usize, seed: u64) -> Result<Graph> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Infeasible(format!(
            "cubic graphs need even n >= 4, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MAX_ATTEMPTS: usize = 100_000;
    for _ in 0..MAX_ATTEMPTS {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(3 * n / 2);
        let mut ok = true;
        for pair in stubs.chunks(2) {
            if pair[0] == pair[1] {
                ok = false;
                break;
            }
            edges.push((pair[0], pair[1]));
        }
        if !ok {
            continue;
        }
        let g = Graph::new(n, &edges)?;
        let r = g.validate();
        if r.all() {
            return Ok(g);
        }
    }
    Err(Error::Infeasible(format!(
        "no bridgeless cubic graph found for n = {n} after {MAX_ATTEMPTS} attempts"
    )))
}

/// Random graph with the extra guarantee of girth at least 4 (rejects
/// triangles as well); used by the randomized swap exercises, where
/// triangle-free 2-factors of every perfect-matching complement are needed.
pub fn random_cubic_bridgeless_trianglefree(n: usize, seed: u64) -> Result<Graph> {
    for round in 0..1_000u64 {
        let g = random_cubic_bridgeless(n, seed.wrapping_add(round.wrapping_mul(0x9e37_79b9)))?;
        let has_triangle = g.edges().iter().any(|&(u, v)| {
            g.neighbors(u).iter().any(|&w| w != v && g.has_edge(v, w))
        });
        if !has_triangle {
            return Ok(g);
        }
    }
    Err(Error::Infeasible(format!(
        "no triangle-free instance found for n = {n}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive girth check by BFS from every vertex.
    fn girth(g: &Graph) -> usize {
        let mut best = usize::MAX;
        for start in 0..g.n() {
            let mut dist = vec![usize::MAX; g.n()];
            let mut parent = vec![usize::MAX; g.n()];
            dist[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in g.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        best = best.min(dist[v] + dist[w] + 1);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn petersen_shape() {
        let g = petersen();
        assert_eq!(g.n(), 10);
        assert_eq!(g.edge_count(), 15);
        assert!(g.validate().all());
        assert_eq!(girth(&g), 5);
    }

    #[test]
    fn prism3_shape() {
        let g = prism(3).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.edge_count(), 9);
        assert!(g.validate().all());
        // Hamiltonian: 0-1-4-3-5-2-0 in the layout used here
        for w in [(0, 1), (1, 4), (4, 3), (3, 5), (5, 2), (2, 0)] {
            assert!(g.has_edge(w.0, w.1));
        }
        assert!(prism(2).is_err());
    }

    #[test]
    fn flower_snark_shape() {
        let g = flower_snark(5).unwrap();
        assert_eq!(g.n(), 20);
        assert!(g.validate().all());
        assert_eq!(girth(&g), 5);
        assert!(flower_snark(4).is_err());
        assert!(flower_snark(1).is_err());
    }

    #[test]
    fn generalized_petersen_parameters() {
        assert!(generalized_petersen(6, 3).is_err());
        assert!(generalized_petersen(6, 0).is_err());
        let g = generalized_petersen(7, 2).unwrap();
        assert!(g.validate().all());
    }

    #[test]
    fn random_generator_hits_all_flags_over_many_seeds() {
        for seed in 0..100 {
            let g = random_cubic_bridgeless(12, seed).unwrap();
            assert!(g.validate().all(), "seed {seed}");
        }
    }

    #[test]
    fn random_generator_is_deterministic_per_seed() {
        let a = random_cubic_bridgeless(16, 7).unwrap();
        let b = random_cubic_bridgeless(16, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_generator_rejects_odd_n() {
        assert!(random_cubic_bridgeless(9, 0).is_err());
    }

    #[test]
    fn trianglefree_generator_has_girth_at_least_4() {
        for seed in 0..10 {
            let g = random_cubic_bridgeless_trianglefree(20, seed).unwrap();
            assert!(girth(&g) >= 4);
        }
    }
}
