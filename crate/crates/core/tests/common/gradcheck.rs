//! Central finite-difference check of the analytic MPNN gradients.

use gtaxo::graph::{Graph, Task};
use gtaxo::mpnn::batch::{Batch, GraphTensors};
use gtaxo::mpnn::model::{backward, cross_entropy, forward, Mode};
use gtaxo::mpnn::params::Params;
use gtaxo::mpnn::{ConvKind, ModelConfig, Pooling};
use gtaxo::rng::rng_for;
use ndarray::Array2;
use rand::Rng;

pub fn toy_graph() -> Graph {
    let x = Array2::from_shape_fn((6, 3), |(i, j)| ((i * 7 + j * 3) % 5) as f64 / 4.0 - 0.4);
    Graph::new(6, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)], x).unwrap()
}

pub fn toy_config(kind: ConvKind, task: Task) -> ModelConfig {
    ModelConfig {
        conv_kind: kind,
        task,
        input_dim: 3,
        hidden_dim: 4,
        num_conv_layers: 5,
        head_hidden_dim: 5,
        num_classes: 3,
        use_batch_norm: true,
        residual: true,
        pooling: if task.is_graph_level() { Pooling::Mean } else { Pooling::None },
    }
}

pub fn perturb_params(p: &mut Params) {
    // move batch-norm affine terms and epsilons away from their init
    let mut r = rng_for(5, "perturb", &[]);
    for s in p.groups_mut() {
        for v in s.iter_mut() {
            *v += r.gen_range(-0.3..0.3);
        }
    }
}

/// `(group, ‖g_analytic − g_fd‖ / max(‖g_analytic‖, ‖g_fd‖, 1e-6))` for every
/// parameter group of the toy model.
pub fn grad_check(kind: ConvKind, task: Task) -> Vec<(String, f64)> {
    let g = toy_graph();
    let cfg = toy_config(kind, task);
    let t = GraphTensors::new(&g, kind);
    let b = Batch::new(&[&t]);
    let (rows, targets): (Vec<usize>, Vec<usize>) = if task.is_graph_level() {
        (vec![0], vec![2])
    } else {
        ((0..6).collect(), vec![0, 1, 2, 0, 1, 2])
    };
    let mut params = Params::init(&cfg, &mut rng_for(1, "init", &[]));
    perturb_params(&mut params);
    let loss_of = |p: &Params| cross_entropy(&forward(p, &cfg, &b, Mode::Train).logits, &rows, &targets).0;

    let fwd = forward(&params, &cfg, &b, Mode::Train);
    let (_, d) = cross_entropy(&fwd.logits, &rows, &targets);
    let grads = backward(&params, &cfg, &b, &fwd, &d);
    let analytic: Vec<(String, Vec<f64>)> = grads.groups().into_iter().map(|(n, s)| (n, s.to_vec())).collect();

    let h = 1e-5;
    analytic
        .iter()
        .enumerate()
        .map(|(k, (name, ga))| {
            let mut fd = vec![0.0; ga.len()];
            for i in 0..ga.len() {
                let mut plus = params.clone();
                plus.groups_mut()[k][i] += h;
                let mut minus = params.clone();
                minus.groups_mut()[k][i] -= h;
                fd[i] = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            }
            let diff: f64 = ga.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
            // biases feeding batch norm have zero gradient; compare those absolutely
            (name.clone(), diff / norm(ga).max(norm(&fd)).max(1e-6))
        })
        .collect()
}
