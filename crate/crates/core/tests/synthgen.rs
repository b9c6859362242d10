use gtaxo::io::{read_dataset, write_dataset};
use gtaxo::synthgen::{generate, Family, GenSpec};
use proptest::prelude::*;

fn small(family: Family, seed: u64) -> GenSpec {
    let mut spec = GenSpec::default_for(family, seed);
    spec.num_graphs = 20;
    spec.nodes_per_graph = spec.nodes_per_graph.min(60);
    spec
}

#[test]
fn every_family_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    for family in Family::ALL {
        let ds = generate(&small(family, 1)).unwrap();
        let path = dir.path().join(family.name());
        write_dataset(&ds, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), ds, "{family}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generated_graphs_satisfy_graph_invariants(f in 0usize..6, seed in any::<u64>()) {
        let family = Family::ALL[f];
        let spec = small(family, seed);
        let ds = generate(&spec).unwrap();
        prop_assert_eq!(ds.graphs().len(), spec.num_graphs);
        let d = ds.graphs()[0].feature_dim();
        for g in ds.graphs() {
            prop_assert_eq!(g.degrees().total(), 2 * g.num_edges());
            prop_assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(g.edges().iter().all(|&(u, v)| u < v && v < g.num_nodes()));
            prop_assert_eq!(g.feature_dim(), d);
            prop_assert!(g.features().iter().all(|x| x.is_finite()));
        }
        prop_assert_eq!(generate(&spec).unwrap(), ds);
    }
}
