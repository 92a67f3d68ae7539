//! Fixtures shared by the benchmarks.

use densecolor::{decompose, generate, Decomposition, GeneratorSpec, Graph};

/// Graph for `spec`, panicking on bad parameters.
pub fn graph(spec: &str) -> Graph {
    let spec: GeneratorSpec = spec.parse().expect("valid generator");
    generate(&spec).expect("generator succeeds")
}

/// A clique chain together with its decomposition at `epsilon`.
pub fn chain_with_decomposition(size: usize, count: usize, epsilon: f64) -> (Graph, Decomposition) {
    let graph = generate(&GeneratorSpec::CliqueChain { size, count }).expect("generator succeeds");
    let decomposition = decompose(&graph, epsilon).expect("epsilon in range");
    (graph, decomposition)
}
