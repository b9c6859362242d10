mod common;

use common::gradcheck::{self, perturb_params, toy_config, toy_graph};
use gtaxo::graph::{Dataset, Graph, SplitRole, Task};
use gtaxo::mpnn::params::Params;
use gtaxo::mpnn::{self, ConvKind, ModelConfig, TrainConfig};
use gtaxo::rng::rng_for;
use ndarray::Array2;
use rand::Rng;

fn grad_check(kind: ConvKind, task: Task) {
    for (name, rel) in gradcheck::grad_check(kind, task) {
        assert!(rel <= 1e-4, "{kind} {task:?} {name}: relative error {rel:e}");
    }
}

#[test]
fn gcn_gradients_graph_task() {
    grad_check(ConvKind::Gcn, Task::GraphClassification);
}

#[test]
fn gin_gradients_graph_task() {
    grad_check(ConvKind::Gin, Task::GraphClassification);
}

#[test]
fn gcn_gradients_node_task() {
    grad_check(ConvKind::Gcn, Task::InductiveNodeClassification);
}

#[test]
fn gin_gradients_node_task() {
    grad_check(ConvKind::Gin, Task::InductiveNodeClassification);
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    // node u of g becomes perm[u]
    let edges = g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
    let mut x = Array2::zeros(g.features().raw_dim());
    for u in 0..g.num_nodes() {
        x.row_mut(perm[u]).assign(&g.features().row(u));
    }
    Graph::new(g.num_nodes(), edges, x).unwrap()
}

#[test]
fn convolutions_are_permutation_equivariant() {
    let g = toy_graph();
    let perm = [3, 5, 0, 1, 4, 2];
    let gp = permuted(&g, &perm);
    for kind in [ConvKind::Gcn, ConvKind::Gin] {
        let cfg = toy_config(kind, Task::InductiveNodeClassification);
        let mut params = Params::init(&cfg, &mut rng_for(2, "init", &[]));
        perturb_params(&mut params);
        let e = mpnn::node_embeddings(&params, &cfg, &g).unwrap();
        let ep = mpnn::node_embeddings(&params, &cfg, &gp).unwrap();
        for u in 0..6 {
            for j in 0..cfg.hidden_dim {
                assert!((e[[u, j]] - ep[[perm[u], j]]).abs() <= 1e-10);
            }
        }
    }
}

fn trained_shell(cfg: ModelConfig, seed: u64) -> mpnn::TrainedModel {
    let mut params = Params::init(&cfg, &mut rng_for(seed, "init", &[]));
    perturb_params(&mut params);
    mpnn::TrainedModel {
        config: cfg,
        train_config: TrainConfig::default(),
        params,
        history: vec![],
        best_epoch: 0,
        manifest: None,
    }
}

#[test]
fn pooled_prediction_is_permutation_invariant_and_duplication_invariant() {
    let g = toy_graph();
    for kind in [ConvKind::Gcn, ConvKind::Gin] {
        let m = trained_shell(toy_config(kind, Task::GraphClassification), 3);
        let a = mpnn::predict(&m, &g).unwrap();
        let b = mpnn::predict(&m, &permuted(&g, &[1, 0, 5, 4, 3, 2])).unwrap();
        let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
        edges.extend(g.edges().iter().map(|&(u, v)| (u + 6, v + 6)));
        let x = ndarray::concatenate![ndarray::Axis(0), g.features().view(), g.features().view()];
        let c = mpnn::predict(&m, &Graph::new(12, edges, x).unwrap()).unwrap();
        for j in 0..3 {
            assert!((a[[0, j]] - b[[0, j]]).abs() <= 1e-10);
            assert!((a[[0, j]] - c[[0, j]]).abs() <= 1e-10);
        }
    }
}

#[test]
fn edgeless_gcn_is_per_node_and_single_node_pools_to_itself() {
    let x = Array2::from_shape_fn((4, 3), |(i, j)| (i + j) as f64 * 0.1);
    let g = Graph::new(4, vec![], x.clone()).unwrap();
    let cfg = toy_config(ConvKind::Gcn, Task::InductiveNodeClassification);
    let m = trained_shell(cfg.clone(), 4);
    let all = mpnn::node_embeddings(&m.params, &cfg, &g).unwrap();
    for u in 0..4 {
        let single = Graph::new(1, vec![], x.slice(ndarray::s![u..u + 1, ..]).to_owned()).unwrap();
        let e = mpnn::node_embeddings(&m.params, &cfg, &single).unwrap();
        for j in 0..cfg.hidden_dim {
            assert!((all[[u, j]] - e[[0, j]]).abs() <= 1e-12);
        }
    }
}

#[test]
fn gin_keeps_symmetric_nodes_identical() {
    let x = Array2::from_elem((2, 3), 0.7);
    let g = Graph::new(2, vec![(0, 1)], x).unwrap();
    let cfg = toy_config(ConvKind::Gin, Task::InductiveNodeClassification);
    let m = trained_shell(cfg.clone(), 6);
    let e = mpnn::node_embeddings(&m.params, &cfg, &g).unwrap();
    assert_eq!(e.row(0), e.row(1));
}

fn toy_dataset() -> Dataset {
    toy_dataset_sized(20)
}

fn toy_dataset_sized(count: usize) -> Dataset {
    let mut r = rng_for(9, "toy", &[]);
    let graphs: Vec<Graph> = (0..count)
        .map(|i| {
            let n = r.gen_range(4..9);
            let edges = (1..n).map(|v| (r.gen_range(0..v), v)).collect();
            let label = i % 2;
            let x = Array2::from_elem((n, 2), if label == 0 { -1.0 } else { 1.0 });
            Graph::new(n, edges, x).unwrap().with_graph_label(label)
        })
        .collect();
    Dataset::new("toy", graphs, Task::GraphClassification, 2, vec![]).unwrap()
}

#[test]
fn overfits_separable_toy_set() {
    // validation set = copy of the training graphs, so best-val selection
    // tracks training fit
    let base = toy_dataset();
    let mut graphs = base.graphs().to_vec();
    graphs.extend_from_slice(base.graphs());
    let ds = Dataset::new("toy2", graphs, Task::GraphClassification, 2, vec![]).unwrap();
    let roles: Vec<SplitRole> = (0..40).map(|i| if i < 20 { SplitRole::Train } else { SplitRole::Val }).collect();
    for kind in [ConvKind::Gcn, ConvKind::Gin] {
        let cfg = ModelConfig::for_dataset(&ds, kind).with_hidden(16);
        let tcfg = TrainConfig {
            max_epochs: 200,
            batch_size: 8,
            early_stop_patience: 200,
            seed: 1,
            ..TrainConfig::default()
        };
        let model = mpnn::train(&ds, &roles, &cfg, &tcfg).unwrap();
        let r = mpnn::evaluate(&model, &ds, &roles, SplitRole::Train).unwrap();
        assert!(r.auroc.unwrap() >= 0.99, "{kind}: {:?}", r);
    }
}

#[test]
fn training_is_deterministic_and_model_file_round_trips() {
    let ds = toy_dataset();
    let roles: Vec<SplitRole> = (0..20)
        .map(|i| match i % 5 {
            0 => SplitRole::Val,
            1 => SplitRole::Test,
            _ => SplitRole::Train,
        })
        .collect();
    let cfg = ModelConfig::for_dataset(&ds, ConvKind::Gin).with_hidden(8);
    let tcfg = TrainConfig {
        max_epochs: 15,
        batch_size: 4,
        seed: 7,
        ..TrainConfig::default()
    };
    let a = mpnn::train(&ds, &roles, &cfg, &tcfg).unwrap();
    let b = mpnn::train(&ds, &roles, &cfg, &tcfg).unwrap();
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    a.save(&path).unwrap();
    let back = mpnn::TrainedModel::load(&path).unwrap();
    assert_eq!(back, a);
    let g = &ds.graphs()[0];
    assert_eq!(mpnn::predict(&back, g).unwrap(), mpnn::predict(&a, g).unwrap());
}

#[test]
fn rejects_mismatched_inputs() {
    let ds = toy_dataset();
    let cfg = ModelConfig::for_dataset(&ds, ConvKind::Gcn);
    let no_val = vec![SplitRole::Train; 20];
    assert!(mpnn::train(&ds, &no_val, &cfg, &TrainConfig::default()).is_err());
    let bad = TrainConfig {
        lr_decay_factor: 1.0,
        ..TrainConfig::default()
    };
    let roles: Vec<SplitRole> = (0..20).map(|i| if i < 16 { SplitRole::Train } else { SplitRole::Val }).collect();
    assert!(mpnn::train(&ds, &roles, &cfg, &bad).is_err());
    let m = trained_shell(toy_config(ConvKind::Gcn, Task::GraphClassification), 1);
    assert!(mpnn::predict(&m, &ds.graphs()[0]).is_err());
}
