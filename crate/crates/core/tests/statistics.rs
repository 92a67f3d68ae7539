use densecolor::engine::{dense_coloring_step, InvariantMonitor};
use densecolor::{canonical_palettes, decompose, generate, init_state, ColorId, GeneratorSpec};

#[test]
fn first_prefix_pick_is_uniform() {
    let graph = generate(&GeneratorSpec::Complete { n: 21 }).unwrap();
    let d = decompose(&graph, 0.1).unwrap();
    let palettes = canonical_palettes(&graph);
    let trials = 105_000;
    let mut counts = [0usize; 22];
    for seed in 0..trials {
        let mut state = init_state(&graph, palettes.clone()).unwrap();
        let mut monitor = InvariantMonitor::disabled();
        let out = dense_coloring_step(&graph, &mut state, &d, 1.0, seed, 1, &mut monitor).unwrap();
        let ColorId(c) = out.cliques[0].tentative[0];
        counts[c as usize] += 1;
    }
    assert_eq!(counts[0], 0);
    let expected = trials as f64 / 21.0;
    let sd = (trials as f64 * (1.0 / 21.0) * (20.0 / 21.0)).sqrt();
    for (c, &k) in counts.iter().enumerate().skip(1) {
        assert!(
            (k as f64 - expected).abs() <= 5.0 * sd,
            "color {c}: {k} picks, expected {expected:.0} ± {sd:.1}"
        );
    }
}

#[test]
fn full_prefix_uses_distinct_colors() {
    let graph = generate(&GeneratorSpec::CliqueChain { size: 30, count: 4 }).unwrap();
    let d = decompose(&graph, 0.1).unwrap();
    for seed in 0..50 {
        let mut state = init_state(&graph, canonical_palettes(&graph)).unwrap();
        let mut monitor = InvariantMonitor::new(true, &state);
        let out = dense_coloring_step(&graph, &mut state, &d, 1.0, seed, 1, &mut monitor).unwrap();
        for trace in &out.cliques {
            let mut colors = trace.tentative.clone();
            colors.sort();
            colors.dedup();
            assert_eq!(colors.len(), trace.prefix.len());
        }
        assert!(monitor.failures().is_empty());
    }
}
