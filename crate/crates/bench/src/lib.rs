//! Fixtures shared by the benchmarks.

use gtaxo::synthgen::{generate, Family, GenSpec};
use gtaxo::{Dataset, Graph};

/// One graph of the given family with `n` nodes.
pub fn graph(family: Family, n: usize) -> Graph {
    let mut spec = GenSpec::default_for(family, 17);
    spec.num_graphs = 10;
    spec.nodes_per_graph = n;
    generate(&spec).expect("valid spec").graphs()[0].clone()
}

pub fn dataset(family: Family, num_graphs: usize, n: usize) -> Dataset {
    let mut spec = GenSpec::default_for(family, 17);
    spec.num_graphs = num_graphs;
    spec.nodes_per_graph = n;
    generate(&spec).expect("valid spec")
}

/// Smooth pseudo-profile rows for clustering benchmarks.
pub fn profile_rows(n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..p).map(|j| ((i * 31 + j * 17) as f64 * 0.37).sin() * (1.0 + (i % 3) as f64)).collect())
        .collect()
}
