//! Sparse/dense decomposition into almost-cliques.
//!
//! An edge `uv` is a friend edge when `|N(u) ∩ N(v)| >= (1-ε)Δ`; a vertex
//! is dense when it has at least `(1-ε)Δ` friends. The almost-cliques are
//! the connected components of the dense vertices under friend edges, each
//! led by its smallest member. For `ε < 1/5` every dense vertex has at most
//! `εΔ` dense neighbors outside its clique and at most `3εΔ` non-neighbors
//! inside it, every clique has weak diameter at most 2 and at most
//! `(1+3ε)Δ` members. [`StructuralMetrics::violations`] checks all four.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::DecompositionError;
use crate::graph::{Graph, NeighborhoodIndex, VertexId};
use crate::state::ColoringState;

/// Slack for comparing integer counts against real thresholds like `(1-ε)Δ`.
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

/// Round cost charged for identifying the decomposition: every vertex
/// gathers the topology within distance 3.
pub const DECOMPOSITION_ROUNDS: usize = 3;

/// Weak diameters above 2 are reported as this value.
pub const DIAMETER_CAP: u32 = 3;

pub fn validate_epsilon(epsilon: f64) -> Result<f64, DecompositionError> {
    if epsilon > 0.0 && epsilon < 0.2 {
        Ok(epsilon)
    } else {
        Err(DecompositionError::EpsilonOutOfRange(epsilon))
    }
}

/// `count >= (1-ε)Δ`, up to [`THRESHOLD_TOLERANCE`].
pub fn meets_threshold(count: usize, epsilon: f64, max_degree: usize) -> bool {
    count as f64 >= (1.0 - epsilon) * max_degree as f64 - THRESHOLD_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlmostClique {
    pub leader: VertexId,
    pub members: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    epsilon: f64,
    friend_edges: Vec<(VertexId, VertexId)>,
    friends: Vec<Vec<VertexId>>,
    dense: Vec<bool>,
    membership: Vec<Option<usize>>,
    cliques: Vec<AlmostClique>,
}

impl Decomposition {
    /// Assembles a decomposition in canonical form: friend edges and
    /// members sorted, cliques ordered by leader.
    pub(crate) fn from_parts(
        n: usize,
        epsilon: f64,
        mut friend_edges: Vec<(VertexId, VertexId)>,
        dense: Vec<bool>,
        components: Vec<Vec<VertexId>>,
    ) -> Self {
        friend_edges.sort_unstable();
        let mut friends = vec![Vec::new(); n];
        for &(u, v) in &friend_edges {
            friends[u].push(v);
            friends[v].push(u);
        }
        for list in &mut friends {
            list.sort_unstable();
        }
        let mut cliques: Vec<AlmostClique> = components
            .into_iter()
            .map(|mut members| {
                members.sort_unstable();
                AlmostClique {
                    leader: members[0],
                    members,
                }
            })
            .collect();
        cliques.sort_unstable_by_key(|c| c.leader);
        let mut membership = vec![None; n];
        for (j, clique) in cliques.iter().enumerate() {
            for &v in &clique.members {
                membership[v] = Some(j);
            }
        }
        Decomposition {
            epsilon,
            friend_edges,
            friends,
            dense,
            membership,
            cliques,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn friend_edges(&self) -> &[(VertexId, VertexId)] {
        &self.friend_edges
    }

    pub fn friends(&self, v: VertexId) -> &[VertexId] {
        &self.friends[v]
    }

    pub fn is_dense(&self, v: VertexId) -> bool {
        self.dense[v]
    }

    pub fn sparse(&self) -> Vec<VertexId> {
        (0..self.dense.len()).filter(|&v| !self.dense[v]).collect()
    }

    /// Cliques ordered by leader ID.
    pub fn cliques(&self) -> &[AlmostClique] {
        &self.cliques
    }

    /// Index into [`cliques`](Self::cliques), `None` for sparse vertices.
    pub fn clique_of(&self, v: VertexId) -> Option<usize> {
        self.membership[v]
    }

    pub fn leader_of(&self, v: VertexId) -> Option<VertexId> {
        self.membership[v].map(|j| self.cliques[j].leader)
    }

    pub fn export(&self, metrics: &StructuralMetrics) -> DecompositionExport {
        DecompositionExport {
            epsilon: self.epsilon,
            sparse: self.sparse(),
            cliques: self.cliques.clone(),
            metrics: metrics.clone(),
        }
    }
}

/// JSON shape of an exported decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionExport {
    pub epsilon: f64,
    pub sparse: Vec<VertexId>,
    pub cliques: Vec<AlmostClique>,
    pub metrics: StructuralMetrics,
}

/// All friend edges, as `(u, v)` with `u < v` in lexicographic order.
pub fn compute_friend_edges(
    graph: &Graph,
    epsilon: f64,
) -> Result<Vec<(VertexId, VertexId)>, DecompositionError> {
    let epsilon = validate_epsilon(epsilon)?;
    let delta = graph.max_degree();
    if delta == 0 {
        return Ok(Vec::new());
    }
    let index = NeighborhoodIndex::new(graph);
    Ok(graph
        .edges()
        .filter(|&(u, v)| meets_threshold(index.common_count(u, v), epsilon, delta))
        .collect())
}

/// Classifies vertices as dense or sparse and groups the dense ones into
/// almost-cliques. `friend_edges` must come from [`compute_friend_edges`]
/// with the same `epsilon`.
///
/// A graph with `Δ = 0` is classified all sparse.
pub fn classify_and_components(
    graph: &Graph,
    friend_edges: Vec<(VertexId, VertexId)>,
    epsilon: f64,
) -> Result<Decomposition, DecompositionError> {
    let epsilon = validate_epsilon(epsilon)?;
    let n = graph.n();
    let delta = graph.max_degree();
    let mut friend_count = vec![0usize; n];
    for &(u, v) in &friend_edges {
        friend_count[u] += 1;
        friend_count[v] += 1;
    }
    let dense: Vec<bool> = friend_count
        .iter()
        .map(|&c| delta > 0 && meets_threshold(c, epsilon, delta))
        .collect();

    let mut dense_friends = vec![Vec::new(); n];
    for &(u, v) in &friend_edges {
        if dense[u] && dense[v] {
            dense_friends[u].push(v);
            dense_friends[v].push(u);
        }
    }
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !dense[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut component = Vec::new();
        while let Some(u) = queue.pop_front() {
            component.push(u);
            for &w in &dense_friends[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        components.push(component);
    }
    Ok(Decomposition::from_parts(
        n,
        epsilon,
        friend_edges,
        dense,
        components,
    ))
}

/// Dense/sparse classification alone, for any `0 < ε < 1`.
///
/// Without `ε < 1/5` the almost-cliques lose their structural guarantees,
/// but whether a vertex is dense is still well defined.
pub fn dense_vertices(graph: &Graph, epsilon: f64) -> Result<Vec<bool>, DecompositionError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DecompositionError::EpsilonOutOfRange(epsilon));
    }
    let n = graph.n();
    let delta = graph.max_degree();
    if delta == 0 {
        return Ok(vec![false; n]);
    }
    let index = NeighborhoodIndex::new(graph);
    let mut friend_count = vec![0usize; n];
    for (u, v) in graph.edges() {
        if meets_threshold(index.common_count(u, v), epsilon, delta) {
            friend_count[u] += 1;
            friend_count[v] += 1;
        }
    }
    Ok(friend_count
        .iter()
        .map(|&c| meets_threshold(c, epsilon, delta))
        .collect())
}

/// [`compute_friend_edges`] followed by [`classify_and_components`].
pub fn decompose(graph: &Graph, epsilon: f64) -> Result<Decomposition, DecompositionError> {
    let friends = compute_friend_edges(graph, epsilon)?;
    classify_and_components(graph, friends, epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralMetrics {
    /// `d̄(v)` for dense (residual) vertices.
    pub external_degree: Vec<Option<usize>>,
    /// `a(v)`: members of `v`'s clique, other than `v`, not adjacent to `v`.
    pub anti_degree: Vec<Option<usize>>,
    /// Per clique; [`DIAMETER_CAP`] stands for anything above 2.
    pub weak_diameter: Vec<u32>,
    pub clique_size: Vec<usize>,
}

impl StructuralMetrics {
    /// Human-readable descriptions of every violated structural bound.
    pub fn violations(&self, epsilon: f64, max_degree: usize) -> Vec<String> {
        let delta = max_degree as f64;
        let mut out = Vec::new();
        for (v, d) in self.external_degree.iter().enumerate() {
            if let Some(d) = *d {
                if d as f64 > epsilon * delta + THRESHOLD_TOLERANCE {
                    out.push(format!(
                        "external degree of {v} is {d} > εΔ = {}",
                        epsilon * delta
                    ));
                }
            }
        }
        for (v, a) in self.anti_degree.iter().enumerate() {
            if let Some(a) = *a {
                if a as f64 > 3.0 * epsilon * delta + THRESHOLD_TOLERANCE {
                    out.push(format!(
                        "anti-degree of {v} is {a} > 3εΔ = {}",
                        3.0 * epsilon * delta
                    ));
                }
            }
        }
        for (j, &diam) in self.weak_diameter.iter().enumerate() {
            if diam > 2 {
                out.push(format!("clique {j} has weak diameter above 2"));
            }
        }
        for (j, &size) in self.clique_size.iter().enumerate() {
            if size as f64 > (1.0 + 3.0 * epsilon) * delta + THRESHOLD_TOLERANCE {
                out.push(format!(
                    "clique {j} has {size} members > (1+3ε)Δ = {}",
                    (1.0 + 3.0 * epsilon) * delta
                ));
            }
        }
        out
    }
}

/// Computes external degrees, anti-degrees, weak diameters and sizes.
///
/// With a state, everything is restricted to uncolored vertices; weak
/// diameters are still measured in the full graph.
pub fn structural_metrics(
    graph: &Graph,
    decomp: &Decomposition,
    state: Option<&ColoringState>,
) -> StructuralMetrics {
    let n = graph.n();
    let alive = |v: VertexId| state.is_none_or(|s| !s.is_colored(v));
    let members: Vec<Vec<VertexId>> = decomp
        .cliques
        .iter()
        .map(|c| c.members.iter().copied().filter(|&v| alive(v)).collect())
        .collect();

    let mut external_degree = vec![None; n];
    let mut anti_degree = vec![None; n];
    for (j, clique) in members.iter().enumerate() {
        for &v in clique {
            let mut external = 0;
            let mut internal = 0;
            for &w in graph.neighbors(v) {
                if !alive(w) {
                    continue;
                }
                match decomp.membership[w] {
                    Some(k) if k == j => internal += 1,
                    Some(_) => external += 1,
                    None => {}
                }
            }
            external_degree[v] = Some(external);
            anti_degree[v] = Some(clique.len() - 1 - internal);
        }
    }

    let index = NeighborhoodIndex::new(graph);
    let weak_diameter = members
        .iter()
        .map(|clique| {
            let mut diam = 0;
            for (i, &x) in clique.iter().enumerate() {
                for &y in &clique[i + 1..] {
                    let dist = if graph.has_edge(x, y) {
                        1
                    } else if index.share_neighbor(x, y) {
                        2
                    } else {
                        DIAMETER_CAP
                    };
                    diam = diam.max(dist);
                    if diam == DIAMETER_CAP {
                        return diam;
                    }
                }
            }
            diam
        })
        .collect();

    StructuralMetrics {
        external_degree,
        anti_degree,
        weak_diameter,
        clique_size: members.iter().map(Vec::len).collect(),
    }
}

/// Pairs from the same clique whose common neighborhood falls below
/// `(1-2ε)Δ`, with the offending overlap.
pub fn pair_overlap_deficits(
    graph: &Graph,
    decomp: &Decomposition,
    pairs: &[(VertexId, VertexId)],
) -> Vec<(VertexId, VertexId, usize)> {
    let bound = (1.0 - 2.0 * decomp.epsilon) * graph.max_degree() as f64;
    pairs
        .iter()
        .filter(|&&(x, y)| {
            x != y && decomp.clique_of(x).is_some() && decomp.clique_of(x) == decomp.clique_of(y)
        })
        .filter_map(|&(x, y)| {
            let overlap =
                crate::graph::sorted_intersection_len(graph.neighbors(x), graph.neighbors(y));
            (overlap as f64 + THRESHOLD_TOLERANCE < bound).then_some((x, y, overlap))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorSpec};
    use crate::palette::{canonical_palettes, ColorId};
    use crate::state::init_state;

    fn complete(n: usize) -> Graph {
        generate(&GeneratorSpec::Complete { n }).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn epsilon_range() {
        for bad in [0.0, -0.1, 0.2, 0.5, f64::NAN] {
            assert!(compute_friend_edges(&complete(4), bad).is_err());
        }
        assert!(compute_friend_edges(&complete(4), 0.199).is_ok());
    }

    #[test]
    fn complete_graph_is_one_clique() {
        let g = complete(21);
        let f = compute_friend_edges(&g, 0.1).unwrap();
        assert_eq!(f.len(), 210);
        let d = classify_and_components(&g, f, 0.1).unwrap();
        assert!(d.sparse().is_empty());
        assert_eq!(d.cliques().len(), 1);
        assert_eq!(d.cliques()[0].leader, 0);
        assert_eq!(d.cliques()[0].members.len(), 21);

        let m = structural_metrics(&g, &d, None);
        assert!(m.external_degree.iter().all(|&x| x == Some(0)));
        assert!(m.anti_degree.iter().all(|&x| x == Some(0)));
        assert_eq!(m.weak_diameter, vec![1]);
        assert_eq!(m.clique_size, vec![21]);
        assert!(m.violations(0.1, 20).is_empty());
    }

    #[test]
    fn cycle_is_all_sparse() {
        let g = cycle(5);
        for eps in [0.01, 0.1, 0.19] {
            let d = decompose(&g, eps).unwrap();
            assert!(d.friend_edges().is_empty());
            assert_eq!(d.sparse().len(), 5);
            assert!(d.cliques().is_empty());
        }
    }

    #[test]
    fn edgeless_graph_is_all_sparse() {
        let d = decompose(&Graph::from_edges(4, []).unwrap(), 0.1).unwrap();
        assert_eq!(d.sparse(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn bridged_double_clique() {
        let g = generate(&GeneratorSpec::CliqueChain { size: 21, count: 2 }).unwrap();
        assert_eq!(g.max_degree(), 21);
        let d = decompose(&g, 0.1).unwrap();
        assert!(d.sparse().is_empty());
        assert_eq!(d.cliques().len(), 2);
        assert_eq!(d.cliques()[0].leader, 0);
        assert_eq!(d.cliques()[1].leader, 21);
        assert!(!d.friend_edges().contains(&(20, 21)));
        for v in g.vertices() {
            assert_eq!(d.friends(v).len(), 20);
        }

        let m = structural_metrics(&g, &d, None);
        for v in g.vertices() {
            let expected = if v == 20 || v == 21 { 1 } else { 0 };
            assert_eq!(m.external_degree[v], Some(expected), "vertex {v}");
            assert_eq!(m.anti_degree[v], Some(0));
        }
        assert_eq!(m.weak_diameter, vec![1, 1]);
        assert!(m.violations(0.1, 21).is_empty());
    }

    #[test]
    fn residual_view_shrinks_cliques() {
        let g = complete(12);
        let d = decompose(&g, 0.1).unwrap();
        let mut s = init_state(&g, canonical_palettes(&g)).unwrap();
        s.commit_colors(&g, &[(0, ColorId(1)), (3, ColorId(2))])
            .unwrap();
        let m = structural_metrics(&g, &d, Some(&s));
        assert_eq!(m.clique_size, vec![10]);
        assert_eq!(m.external_degree[0], None);
        assert_eq!(m.anti_degree[1], Some(0));
    }

    #[test]
    fn missing_edges_show_as_anti_degree() {
        // K_12 minus the edge 0-1: each endpoint shares 9 neighbors with
        // every other vertex, against a threshold of 0.81 * 11.
        let edges: Vec<_> = (0..12)
            .flat_map(|u| (u + 1..12).map(move |v| (u, v)))
            .filter(|&e| e != (0, 1))
            .collect();
        let g = Graph::from_edges(12, edges).unwrap();
        let d = decompose(&g, 0.19).unwrap();
        assert_eq!(d.cliques().len(), 1);
        let m = structural_metrics(&g, &d, None);
        assert_eq!(m.anti_degree[0], Some(1));
        assert_eq!(m.anti_degree[1], Some(1));
        assert_eq!(m.anti_degree[2], Some(0));
        assert_eq!(m.weak_diameter, vec![2]);
    }

    #[test]
    fn classification_matches_decomposition() {
        let g = generate(&GeneratorSpec::CliqueChain { size: 21, count: 3 }).unwrap();
        let d = decompose(&g, 0.1).unwrap();
        let dense = dense_vertices(&g, 0.1).unwrap();
        assert!(g.vertices().all(|v| dense[v] == d.is_dense(v)));
        assert!(dense_vertices(&g, 0.5).unwrap().iter().all(|&b| b));
        assert!(dense_vertices(&g, 1.0).is_err());
    }

    #[test]
    fn threshold_is_inclusive() {
        // 48 common neighbors against (1-0.04)*50 = 48.
        assert!(meets_threshold(48, 0.04, 50));
        assert!(!meets_threshold(47, 0.04, 50));
    }

    #[test]
    fn overlap_deficits_only_within_cliques() {
        let g = generate(&GeneratorSpec::CliqueChain { size: 21, count: 2 }).unwrap();
        let d = decompose(&g, 0.1).unwrap();
        assert!(pair_overlap_deficits(&g, &d, &[(0, 5), (3, 19), (0, 30)]).is_empty());
    }
}
