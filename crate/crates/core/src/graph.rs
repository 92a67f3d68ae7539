//! Immutable simple undirected graphs.

use std::fmt::Write as _;

use crate::error::GraphError;

pub type VertexId = usize;

/// Simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    max_degree: usize,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices. Both orientations of a pair and
    /// repeated pairs collapse to one edge; self-loops and IDs `>= n` are
    /// rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let max = u.max(v);
            if max >= n {
                return Err(GraphError::VertexOutOfRange { vertex: max, n });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_adjacency(adjacency))
    }

    /// Builds a graph whose vertex count is one more than the largest ID seen.
    pub fn from_edge_list<I>(edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let edges: Vec<_> = edges.into_iter().collect();
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::from_edges(n, edges)
    }

    fn from_sorted_adjacency(adjacency: Vec<Vec<VertexId>>) -> Self {
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            adjacency,
            max_degree,
            edge_count,
        }
    }

    /// Parses the text edge-list format: one `u v` pair per line, `#`
    /// starts a comment, and an optional `n <count>` header fixes the
    /// vertex count (otherwise it is inferred from the largest ID).
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut declared_n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let first = fields.next().unwrap_or_default();
            let second = fields.next();
            if fields.next().is_some() {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected two fields, got `{line}`"),
                });
            }
            let Some(second) = second else {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected two fields, got `{line}`"),
                });
            };
            let parse_id = |s: &str| {
                s.parse::<VertexId>().map_err(|_| GraphError::Parse {
                    line: line_no,
                    message: format!("`{s}` is not a nonnegative integer"),
                })
            };
            if first == "n" {
                if declared_n.is_some() || !edges.is_empty() {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: "`n` header must appear once, before any edge".into(),
                    });
                }
                declared_n = Some(parse_id(second)?);
                continue;
            }
            edges.push((parse_id(first)?, parse_id(second)?));
        }
        match declared_n {
            Some(n) => Self::from_edges(n, edges),
            None => Self::from_edge_list(edges),
        }
    }

    /// Renders the graph in the edge-list format, header included.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Maximum degree Δ.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.n()
    }
}

/// Size of the common neighborhood of two sorted lists.
pub(crate) fn sorted_intersection_len(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Beyond this many vertices the dense bit matrix is not built and common
/// neighborhoods fall back to merging sorted lists.
const BIT_MATRIX_MAX_N: usize = 20_000;

/// Common-neighborhood queries, backed by an adjacency bit matrix when the
/// graph is small enough.
pub(crate) struct NeighborhoodIndex<'g> {
    graph: &'g Graph,
    words: usize,
    bits: Vec<u64>,
}

impl<'g> NeighborhoodIndex<'g> {
    pub(crate) fn new(graph: &'g Graph) -> Self {
        let n = graph.n();
        if n > BIT_MATRIX_MAX_N {
            return NeighborhoodIndex {
                graph,
                words: 0,
                bits: Vec::new(),
            };
        }
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for v in graph.vertices() {
            let row = &mut bits[v * words..(v + 1) * words];
            for &w in graph.neighbors(v) {
                row[w / 64] |= 1 << (w % 64);
            }
        }
        NeighborhoodIndex { graph, words, bits }
    }

    fn row(&self, v: VertexId) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    fn has_bits(&self) -> bool {
        self.words > 0 || self.graph.n() == 0
    }

    /// `|N(u) ∩ N(v)|`.
    pub(crate) fn common_count(&self, u: VertexId, v: VertexId) -> usize {
        if self.has_bits() {
            self.row(u)
                .iter()
                .zip(self.row(v))
                .map(|(a, b)| (a & b).count_ones() as usize)
                .sum()
        } else {
            sorted_intersection_len(self.graph.neighbors(u), self.graph.neighbors(v))
        }
    }

    /// Whether `N(u) ∩ N(v)` is nonempty.
    pub(crate) fn share_neighbor(&self, u: VertexId, v: VertexId) -> bool {
        if self.has_bits() {
            self.row(u).iter().zip(self.row(v)).any(|(a, b)| a & b != 0)
        } else {
            sorted_intersection_len(self.graph.neighbors(u), self.graph.neighbors(v)) > 0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let g = Graph::from_edge_list([(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn empty_graph_with_declared_n() {
        let g = Graph::from_edges(3, []).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.max_degree(), 0);
        assert_eq!(g.edges().count(), 0);
    }

    #[test]
    fn duplicate_orientations_collapse() {
        let g = Graph::from_edge_list([(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(
            Graph::from_edge_list([(0, 1), (2, 2)]),
            Err(GraphError::SelfLoop(2))
        );
    }

    #[test]
    fn id_beyond_declared_n_rejected() {
        let err = Graph::parse_edge_list("n 3\n0 1\n1 3\n").unwrap_err();
        assert_eq!(err, GraphError::VertexOutOfRange { vertex: 3, n: 3 });
    }

    #[test]
    fn parse_with_comments_and_header() {
        let text = "# triangle plus isolated vertex\nn 4\n0 1\n1 2 # inline\n\n2 0\n";
        let g = Graph::parse_edge_list(text).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(3), 0);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn malformed_lines() {
        for text in ["0\n", "0 1 2\n", "a b\n", "0 -1\n", "0 1\nn 4\n"] {
            assert!(
                matches!(Graph::parse_edge_list(text), Err(GraphError::Parse { .. })),
                "{text:?} should not parse"
            );
        }
    }

    #[test]
    fn bit_matrix_matches_merge() {
        let g = Graph::from_edge_list([(0, 1), (0, 2), (1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let index = NeighborhoodIndex::new(&g);
        for u in g.vertices() {
            for v in g.vertices() {
                let merged = sorted_intersection_len(g.neighbors(u), g.neighbors(v));
                assert_eq!(index.common_count(u, v), merged);
                assert_eq!(index.share_neighbor(u, v), merged > 0);
            }
        }
    }
}
