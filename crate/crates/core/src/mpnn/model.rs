//! Forward pass, softmax cross-entropy and hand-derived backward pass.

use ndarray::{Array1, Array2, Axis, Zip};

use super::batch::Batch;
use super::params::{Conv, Linear, Params};
use super::{ModelConfig, Pooling};

pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in batch norm.
    Train,
    /// Running statistics in batch norm.
    Eval,
}

#[derive(Debug, Clone)]
struct BnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    /// Batch mean and biased variance (train mode only).
    stats: Option<(Array1<f64>, Array1<f64>)>,
}

#[derive(Debug, Clone)]
struct LayerCache {
    h_in: Array2<f64>,
    /// `P H` for GCN, `(1 + ε) H + A H` for GIN.
    m: Array2<f64>,
    /// GIN hidden pre-activation and activation.
    gin_hidden: Option<(Array2<f64>, Array2<f64>)>,
    bn: Option<BnCache>,
    /// Input of the layer's rectifier.
    y: Array2<f64>,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    mode: Mode,
    layers: Vec<LayerCache>,
    h_final: Array2<f64>,
    pooled: Array2<f64>,
    head_pre: Array2<f64>,
    head_act: Array2<f64>,
    pub logits: Array2<f64>,
}

impl Forward {
    /// Node embeddings after the last convolution.
    pub fn embeddings(&self) -> &Array2<f64> {
        &self.h_final
    }

    /// Batch mean and biased variance of each batch-norm layer (train mode).
    pub fn batch_stats(&self) -> Vec<Option<(Array1<f64>, Array1<f64>)>> {
        self.layers
            .iter()
            .map(|l| l.bn.as_ref().and_then(|b| b.stats.clone()))
            .collect()
    }
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

fn relu_back(grad: &Array2<f64>, pre: &Array2<f64>) -> Array2<f64> {
    let mut out = grad.clone();
    Zip::from(&mut out).and(pre).for_each(|g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    out
}

/// Row-mean of each graph's node block.
fn mean_pool(h: &Array2<f64>, offsets: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((offsets.len() - 1, h.ncols()));
    for (g, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let (a, b) = (offsets[g], offsets[g + 1]);
        if b > a {
            row.assign(&h.slice(ndarray::s![a..b, ..]).sum_axis(Axis(0)));
            row /= (b - a) as f64;
        }
    }
    out
}

pub fn forward(params: &Params, cfg: &ModelConfig, batch: &Batch, mode: Mode) -> Forward {
    let mut h = params.embed.forward(&batch.x);
    let mut layers = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let (m, gin_hidden, z) = match &layer.conv {
            Conv::Gcn { lin } => {
                let m = batch.prop.apply(h.view());
                let z = lin.forward(&m);
                (m, None, z)
            }
            Conv::Gin { eps, lin1, lin2 } => {
                let mut m = batch.prop.apply(h.view());
                m.scaled_add(1.0 + eps[0], &h);
                let u = lin1.forward(&m);
                let r = relu(&u);
                let z = lin2.forward(&r);
                (m, Some((u, r)), z)
            }
        };
        let (y, bn) = match &layer.bn {
            None => (z, None),
            Some(bn) => {
                let (mean, var, stats) = match mode {
                    Mode::Train => {
                        let mean = z.mean_axis(Axis(0)).expect("nonempty batch");
                        let var = z.var_axis(Axis(0), 0.0);
                        (mean.clone(), var.clone(), Some((mean, var)))
                    }
                    Mode::Eval => (bn.running_mean.clone(), bn.running_var.clone(), None),
                };
                let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                let xhat = (&z - &mean) * &inv_std;
                let y = &xhat * &bn.gamma + &bn.beta;
                (y, Some(BnCache { xhat, inv_std, stats }))
            }
        };
        let act = relu(&y);
        let h_next = if cfg.residual { &h + &act } else { act };
        layers.push(LayerCache {
            h_in: std::mem::replace(&mut h, h_next),
            m,
            gin_hidden,
            bn,
            y,
        });
    }
    let pooled = match cfg.pooling {
        Pooling::Mean => mean_pool(&h, &batch.offsets),
        Pooling::None => h.clone(),
    };
    let head_pre = params.head1.forward(&pooled);
    let head_act = relu(&head_pre);
    let logits = params.head2.forward(&head_act);
    Forward {
        mode,
        layers,
        h_final: h,
        pooled,
        head_pre,
        head_act,
        logits,
    }
}

/// Row-wise softmax.
pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row /= s;
    }
    out
}

/// Mean cross-entropy over `rows` and its gradient with respect to all logits.
pub fn cross_entropy(logits: &Array2<f64>, rows: &[usize], targets: &[usize]) -> (f64, Array2<f64>) {
    assert_eq!(rows.len(), targets.len(), "rows and targets differ in length");
    let mut grad = Array2::zeros(logits.raw_dim());
    if rows.is_empty() {
        return (0.0, grad);
    }
    let scale = 1.0 / rows.len() as f64;
    let mut loss = 0.0;
    for (&r, &t) in rows.iter().zip(targets) {
        let row = logits.row(r);
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[t];
        let mut g = grad.row_mut(r);
        for (c, gc) in g.iter_mut().enumerate() {
            *gc = scale * ((row[c] - lse).exp() - if c == t { 1.0 } else { 0.0 });
        }
    }
    (loss * scale, grad)
}

fn linear_back(lin: &Linear, grad_lin: &mut Linear, input: &Array2<f64>, d_out: &Array2<f64>) -> Array2<f64> {
    grad_lin.w += &input.t().dot(d_out);
    grad_lin.b += &d_out.sum_axis(Axis(0));
    d_out.dot(&lin.w.t())
}

/// Gradients of the loss with respect to every trainable tensor, given the
/// gradient `d_logits` of the loss with respect to the output scores.
pub fn backward(params: &Params, cfg: &ModelConfig, batch: &Batch, fwd: &Forward, d_logits: &Array2<f64>) -> Params {
    let mut grads = params.zeros_like();
    let d_act = linear_back(&params.head2, &mut grads.head2, &fwd.head_act, d_logits);
    let d_pre = relu_back(&d_act, &fwd.head_pre);
    let d_pooled = linear_back(&params.head1, &mut grads.head1, &fwd.pooled, &d_pre);
    let mut dh = match cfg.pooling {
        Pooling::None => d_pooled,
        Pooling::Mean => {
            let mut dh = Array2::zeros(fwd.h_final.raw_dim());
            let o = &batch.offsets;
            for g in 0..o.len() - 1 {
                let size = (o[g + 1] - o[g]) as f64;
                for u in o[g]..o[g + 1] {
                    dh.row_mut(u).scaled_add(1.0 / size, &d_pooled.row(g));
                }
            }
            dh
        }
    };
    for (i, cache) in fwd.layers.iter().enumerate().rev() {
        let layer = &params.layers[i];
        let grad_layer = &mut grads.layers[i];
        let dy = relu_back(&dh, &cache.y);
        let dz = match (&layer.bn, &cache.bn) {
            (Some(bn), Some(bc)) => {
                let gbn = grad_layer.bn.as_mut().expect("grad mirrors params");
                gbn.gamma += &(&dy * &bc.xhat).sum_axis(Axis(0));
                gbn.beta += &dy.sum_axis(Axis(0));
                let dxhat = &dy * &bn.gamma;
                match fwd.mode {
                    Mode::Eval => dxhat * &bc.inv_std,
                    Mode::Train => {
                        let n = dy.nrows() as f64;
                        let sum_dxhat = dxhat.sum_axis(Axis(0));
                        let sum_dxhat_xhat = (&dxhat * &bc.xhat).sum_axis(Axis(0));
                        let centered = &dxhat * n - &sum_dxhat - &(&bc.xhat * &sum_dxhat_xhat);
                        centered * &(&bc.inv_std / n)
                    }
                }
            }
            _ => dy,
        };
        let mut dh_prev = if cfg.residual { dh } else { Array2::zeros(cache.h_in.raw_dim()) };
        match (&layer.conv, &mut grad_layer.conv) {
            (Conv::Gcn { lin }, Conv::Gcn { lin: glin }) => {
                let dm = linear_back(lin, glin, &cache.m, &dz);
                dh_prev += &batch.prop.apply(dm.view());
            }
            (
                Conv::Gin { eps, lin1, lin2 },
                Conv::Gin {
                    eps: geps,
                    lin1: glin1,
                    lin2: glin2,
                },
            ) => {
                let (u, r) = cache.gin_hidden.as_ref().expect("gin cache");
                let dr = linear_back(lin2, glin2, r, &dz);
                let du = relu_back(&dr, u);
                let ds = linear_back(lin1, glin1, &cache.m, &du);
                geps[0] += (&ds * &cache.h_in).sum();
                dh_prev.scaled_add(1.0 + eps[0], &ds);
                dh_prev += &batch.prop.apply(ds.view());
            }
            _ => unreachable!("grad mirrors params"),
        }
        dh = dh_prev;
    }
    linear_back(&params.embed, &mut grads.embed, &batch.x, &dh);
    grads
}
