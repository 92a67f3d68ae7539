//! Brute-force reference decomposition.
//!
//! Shares nothing with [`crate::decomposition`] beyond the threshold
//! comparison and the canonical output form: common neighbors are counted
//! by scanning every vertex against a boolean adjacency matrix, and cliques
//! come from union-find instead of breadth-first search.

use crate::decomposition::{meets_threshold, validate_epsilon, Decomposition};
use crate::error::DecompositionError;
use crate::graph::{Graph, VertexId};

pub const ORACLE_MAX_N: usize = 500;

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

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn brute_force_decomposition(
    graph: &Graph,
    epsilon: f64,
) -> Result<Decomposition, DecompositionError> {
    let epsilon = validate_epsilon(epsilon)?;
    let n = graph.n();
    if n > ORACLE_MAX_N {
        return Err(DecompositionError::TooLarge {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in graph.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let delta = (0..n)
        .map(|u| adj[u].iter().filter(|&&b| b).count())
        .max()
        .unwrap_or(0);

    let mut friend_edges: Vec<(VertexId, VertexId)> = Vec::new();
    if delta > 0 {
        for u in 0..n {
            for v in u + 1..n {
                if !adj[u][v] {
                    continue;
                }
                let common = (0..n).filter(|&w| adj[u][w] && adj[v][w]).count();
                if meets_threshold(common, epsilon, delta) {
                    friend_edges.push((u, v));
                }
            }
        }
    }

    let dense: Vec<bool> = (0..n)
        .map(|v| {
            let friends = friend_edges
                .iter()
                .filter(|&&(a, b)| a == v || b == v)
                .count();
            delta > 0 && meets_threshold(friends, epsilon, delta)
        })
        .collect();

    let mut uf = UnionFind::new(n);
    for &(u, v) in &friend_edges {
        if dense[u] && dense[v] {
            uf.union(u, v);
        }
    }
    let mut groups: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| dense[v]) {
        let root = uf.find(v);
        groups[root].push(v);
    }
    let components = groups.into_iter().filter(|g| !g.is_empty()).collect();
    Ok(Decomposition::from_parts(
        n,
        epsilon,
        friend_edges,
        dense,
        components,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::decompose;
    use crate::generators::{generate, GeneratorSpec};

    #[test]
    fn agrees_on_small_cases() {
        let complete = generate(&GeneratorSpec::Complete { n: 21 }).unwrap();
        assert_eq!(
            brute_force_decomposition(&complete, 0.1).unwrap(),
            decompose(&complete, 0.1).unwrap()
        );
        let cycle = Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        let d = brute_force_decomposition(&cycle, 0.1).unwrap();
        assert_eq!(d.sparse().len(), 5);
    }

    #[test]
    fn gnp_150() {
        let g = generate(&GeneratorSpec::Gnp {
            n: 150,
            p: 0.6,
            seed: 12,
        })
        .unwrap();
        assert_eq!(
            brute_force_decomposition(&g, 0.12).unwrap(),
            decompose(&g, 0.12).unwrap()
        );
    }

    #[test]
    fn size_guard() {
        let g = Graph::from_edges(501, []).unwrap();
        assert_eq!(
            brute_force_decomposition(&g, 0.1).unwrap_err(),
            DecompositionError::TooLarge { n: 501, limit: 500 }
        );
    }
}
