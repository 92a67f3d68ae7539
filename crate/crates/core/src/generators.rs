//! Seeded graph generators for the regimes the decomposition separates:
//! cliques, clique chains with sparse bridges, dense and sparse random
//! graphs, triangle-free bipartite graphs, and locally sparse graphs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GeneratorError;
use crate::graph::{sorted_intersection_len, Graph, VertexId};

/// Default cap on rejection-sampling attempts for locally sparse graphs.
pub const DEFAULT_MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Complete {
        n: usize,
    },
    Gnp {
        n: usize,
        p: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `count` disjoint copies of `K_size`, the last vertex of each copy
    /// joined to the first vertex of the next.
    CliqueChain {
        size: usize,
        count: usize,
    },
    /// Random edges between the halves `0..n/2` and `n/2..n`.
    BipartiteRandom {
        n: usize,
        p: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `G(n, p)` resampled until every neighborhood spans at most
    /// `(1-δ)·Δ(Δ-1)/2` edges. `p` defaults to `(1-δ)/2`.
    LocallySparse {
        n: usize,
        sparsity: f64,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        max_attempts: Option<usize>,
    },
}

fn check_probability(p: f64) -> Result<(), GeneratorError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(GeneratorError::InvalidParameters(format!(
            "edge probability must lie in (0, 1), got {p}"
        )))
    }
}

fn check_size(name: &str, value: usize) -> Result<(), GeneratorError> {
    if value >= 1 {
        Ok(())
    } else {
        Err(GeneratorError::InvalidParameters(format!(
            "{name} must be at least 1"
        )))
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Graph, GeneratorError> {
    let graph = match *spec {
        GeneratorSpec::Complete { n } => {
            check_size("n", n)?;
            let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::from_edges(n, edges)
        }
        GeneratorSpec::Gnp { n, p, seed } => {
            check_size("n", n)?;
            check_probability(p)?;
            Graph::from_edges(n, gnp_edges(n, p, &mut ChaCha8Rng::seed_from_u64(seed)))
        }
        GeneratorSpec::CliqueChain { size, count } => {
            check_size("clique size", size)?;
            check_size("clique count", count)?;
            let n = size * count;
            let mut edges = Vec::new();
            for c in 0..count {
                let base = c * size;
                for u in 0..size {
                    for v in u + 1..size {
                        edges.push((base + u, base + v));
                    }
                }
                if c + 1 < count {
                    edges.push((base + size - 1, base + size));
                }
            }
            Graph::from_edges(n, edges)
        }
        GeneratorSpec::BipartiteRandom { n, p, seed } => {
            check_size("n", n)?;
            check_probability(p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let half = n / 2;
            let mut edges = Vec::new();
            for u in 0..half {
                for v in half..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, edges)
        }
        GeneratorSpec::LocallySparse {
            n,
            sparsity,
            p,
            seed,
            max_attempts,
        } => {
            return locally_sparse(
                n,
                sparsity,
                p,
                seed,
                max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS),
            )
        }
    };
    Ok(graph.expect("generated edges are valid"))
}

fn gnp_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(VertexId, VertexId)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn locally_sparse(
    n: usize,
    sparsity: f64,
    p: Option<f64>,
    seed: u64,
    max_attempts: usize,
) -> Result<Graph, GeneratorError> {
    check_size("n", n)?;
    if !(sparsity > 0.0 && sparsity < 1.0) {
        return Err(GeneratorError::InvalidParameters(format!(
            "sparsity must lie in (0, 1), got {sparsity}"
        )));
    }
    let p = p.unwrap_or((1.0 - sparsity) / 2.0);
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_attempts {
        let graph =
            Graph::from_edges(n, gnp_edges(n, p, &mut rng)).expect("generated edges are valid");
        if is_locally_sparse(&graph, sparsity) {
            return Ok(graph);
        }
    }
    Err(GeneratorError::AttemptsExhausted(max_attempts))
}

/// Number of edges inside `G[N(v)]` for every vertex.
pub fn neighborhood_edge_counts(graph: &Graph) -> Vec<usize> {
    graph
        .vertices()
        .map(|v| {
            let nv = graph.neighbors(v);
            let twice: usize = nv
                .iter()
                .map(|&u| sorted_intersection_len(graph.neighbors(u), nv))
                .sum();
            twice / 2
        })
        .collect()
}

/// Whether every neighborhood spans at most `(1-δ)·Δ(Δ-1)/2` edges.
pub fn is_locally_sparse(graph: &Graph, sparsity: f64) -> bool {
    let delta = graph.max_degree() as f64;
    let bound = (1.0 - sparsity) * delta * (delta - 1.0) / 2.0;
    neighborhood_edge_counts(graph)
        .into_iter()
        .all(|count| count as f64 <= bound + 1e-9)
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Complete { n } => write!(f, "complete:{n}"),
            GeneratorSpec::Gnp { n, p, seed } => write!(f, "gnp:{n},{p},{seed}"),
            GeneratorSpec::CliqueChain { size, count } => write!(f, "clique_chain:{size}x{count}"),
            GeneratorSpec::BipartiteRandom { n, p, seed } => {
                write!(f, "bipartite_random:{n},{p},{seed}")
            }
            GeneratorSpec::LocallySparse {
                n, sparsity, seed, ..
            } => {
                write!(f, "locally_sparse:{n},{sparsity},{seed}")
            }
        }
    }
}

/// Compact syntax used on the command line:
///
/// ```text
/// complete:21
/// gnp:200,0.5[,seed]
/// clique_chain:21x8
/// bipartite_random:100,0.3[,seed]
/// locally_sparse:200,0.5[,seed]
/// ```
impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GeneratorError::Syntax(s.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let fields: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<usize, GeneratorError> {
            fields.get(i).and_then(|f| f.parse().ok()).ok_or_else(bad)
        };
        let real = |i: usize| -> Result<f64, GeneratorError> {
            fields.get(i).and_then(|f| f.parse().ok()).ok_or_else(bad)
        };
        let seed = |i: usize| -> Result<u64, GeneratorError> {
            match fields.get(i) {
                None => Ok(0),
                Some(f) => f.parse().map_err(|_| bad()),
            }
        };
        let arity = |min: usize, max: usize| {
            if (min..=max).contains(&fields.len()) {
                Ok(())
            } else {
                Err(bad())
            }
        };
        match kind {
            "complete" => {
                arity(1, 1)?;
                Ok(GeneratorSpec::Complete { n: int(0)? })
            }
            "gnp" => {
                arity(2, 3)?;
                Ok(GeneratorSpec::Gnp {
                    n: int(0)?,
                    p: real(1)?,
                    seed: seed(2)?,
                })
            }
            "clique_chain" => {
                arity(1, 1)?;
                let (size, count) = fields[0].split_once('x').ok_or_else(bad)?;
                Ok(GeneratorSpec::CliqueChain {
                    size: size.parse().map_err(|_| bad())?,
                    count: count.parse().map_err(|_| bad())?,
                })
            }
            "bipartite_random" => {
                arity(2, 3)?;
                Ok(GeneratorSpec::BipartiteRandom {
                    n: int(0)?,
                    p: real(1)?,
                    seed: seed(2)?,
                })
            }
            "locally_sparse" => {
                arity(2, 3)?;
                Ok(GeneratorSpec::LocallySparse {
                    n: int(0)?,
                    sparsity: real(1)?,
                    p: None,
                    seed: seed(2)?,
                    max_attempts: None,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl GeneratorSpec {
    /// The same spec with its seed replaced, for kinds that take one.
    pub fn with_seed(&self, new_seed: u64) -> GeneratorSpec {
        let mut spec = self.clone();
        match &mut spec {
            GeneratorSpec::Gnp { seed, .. }
            | GeneratorSpec::BipartiteRandom { seed, .. }
            | GeneratorSpec::LocallySparse { seed, .. } => *seed = new_seed,
            GeneratorSpec::Complete { .. } | GeneratorSpec::CliqueChain { .. } => {}
        }
        spec
    }
}
