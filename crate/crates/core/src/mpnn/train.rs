//! Adam training loop with plateau decay and early stopping.

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::batch::{Batch, GraphTensors};
use super::model::{self, Mode};
use super::params::Params;
use super::{check_features, macro_auroc, ModelConfig, TrainConfig};
use crate::dec;
use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, SplitRole, Task};
use crate::rng;

/// Graphs per forward pass at evaluation time.
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    #[serde(with = "dec::scalar")]
    pub train_loss: f64,
    #[serde(with = "dec::scalar")]
    pub val_loss: f64,
    #[serde(with = "dec::option")]
    pub val_auroc: Option<f64>,
    #[serde(with = "dec::scalar")]
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub train_config: TrainConfig,
    pub params: Params,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<crate::manifest::RunManifest>,
}

impl TrainedModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json_pretty(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: TrainedModel = serde_json::from_str(&text).map_err(|e| Error::InputFormat(format!("model file: {e}")))?;
        m.config.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub loss: f64,
    pub auroc: Option<f64>,
    pub count: usize,
}

/// Evaluation inputs for one split role: pre-built batches plus the output
/// rows and targets inside each batch.
struct EvalSet {
    batches: Vec<(Batch, Vec<usize>, Vec<usize>)>,
}

struct Prepared<'d> {
    ds: &'d Dataset,
    tensors: Vec<GraphTensors>,
}

impl<'d> Prepared<'d> {
    fn new(ds: &'d Dataset, cfg: &ModelConfig) -> Result<Self> {
        for g in ds.graphs() {
            check_features(cfg, g)?;
        }
        let tensors = ds.graphs().iter().map(|g| GraphTensors::new(g, cfg.conv_kind)).collect();
        Ok(Prepared { ds, tensors })
    }

    /// Output rows and their targets for graphs `members` batched together,
    /// restricted to transductive nodes with role `role` when given.
    fn rows(&self, members: &[usize], node_role: Option<(&[SplitRole], SplitRole)>) -> (Vec<usize>, Vec<usize>) {
        match self.ds.task() {
            Task::GraphClassification => (
                (0..members.len()).collect(),
                members.iter().map(|&i| self.tensors[i].graph_label.expect("validated")).collect(),
            ),
            Task::InductiveNodeClassification => {
                let targets: Vec<usize> = members
                    .iter()
                    .flat_map(|&i| self.tensors[i].node_labels.clone().expect("validated"))
                    .collect();
                ((0..targets.len()).collect(), targets)
            }
            Task::TransductiveNodeClassification => {
                let labels = self.tensors[0].node_labels.as_ref().expect("validated");
                let (roles, want) = node_role.expect("transductive rows need roles");
                let rows: Vec<usize> = (0..labels.len()).filter(|&u| roles[u] == want).collect();
                let targets = rows.iter().map(|&u| labels[u]).collect();
                (rows, targets)
            }
        }
    }

    fn members(&self, roles: &[SplitRole], want: SplitRole) -> Vec<usize> {
        match self.ds.task() {
            Task::TransductiveNodeClassification => vec![0],
            _ => (0..roles.len()).filter(|&i| roles[i] == want).collect(),
        }
    }

    fn batch(&self, members: &[usize]) -> Batch {
        let parts: Vec<&GraphTensors> = members.iter().map(|&i| &self.tensors[i]).collect();
        Batch::new(&parts)
    }

    fn eval_set(&self, roles: &[SplitRole], want: SplitRole) -> EvalSet {
        let members = self.members(roles, want);
        let batches = members
            .chunks(EVAL_CHUNK)
            .map(|chunk| {
                let (rows, targets) = self.rows(chunk, Some((roles, want)));
                (self.batch(chunk), rows, targets)
            })
            .collect();
        EvalSet { batches }
    }
}

fn run_eval(params: &Params, cfg: &ModelConfig, set: &EvalSet) -> EvalResult {
    let mut probs: Vec<Array1<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut loss_sum = 0.0;
    for (b, rows, targets) in &set.batches {
        let fwd = model::forward(params, cfg, b, Mode::Eval);
        let (loss, _) = model::cross_entropy(&fwd.logits, rows, targets);
        loss_sum += loss * rows.len() as f64;
        let p = model::softmax(&fwd.logits);
        probs.extend(rows.iter().map(|&r| p.row(r).to_owned()));
        labels.extend_from_slice(targets);
    }
    let count = labels.len();
    if count == 0 {
        return EvalResult {
            loss: f64::NAN,
            auroc: None,
            count,
        };
    }
    let scores = Array2::from_shape_fn((count, cfg.num_classes), |(i, c)| probs[i][c]);
    EvalResult {
        loss: loss_sum / count as f64,
        auroc: macro_auroc(&scores, &labels),
        count,
    }
}

/// Roles must assign one entry per split entity of `ds`.
fn check_roles(ds: &Dataset, roles: &[SplitRole]) -> Result<()> {
    if roles.len() != ds.num_entities() {
        return Err(Error::Shape(format!(
            "{} split roles for {} entities",
            roles.len(),
            ds.num_entities()
        )));
    }
    Ok(())
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(params: &Params) -> Self {
        let shapes: Vec<Vec<f64>> = params.groups().iter().map(|(_, s)| vec![0.0; s.len()]).collect();
        Adam {
            m: shapes.clone(),
            v: shapes,
            t: 0,
        }
    }

    fn step(&mut self, params: &mut Params, grads: &Params, lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let grads = grads.groups();
        for (k, p) in params.groups_mut().into_iter().enumerate() {
            let g = grads[k].1;
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.adam_eps);
            }
        }
    }
}

fn update_running_stats(params: &mut Params, fwd: &model::Forward, n: usize, momentum: f64) {
    if n < 2 {
        return;
    }
    let unbias = n as f64 / (n - 1) as f64;
    for (layer, stats) in params.layers.iter_mut().zip(fwd.batch_stats()) {
        if let (Some(bn), Some((mean, var))) = (layer.bn.as_mut(), stats) {
            bn.running_mean = &bn.running_mean * (1.0 - momentum) + &(mean * momentum);
            bn.running_var = &bn.running_var * (1.0 - momentum) + &(var * (momentum * unbias));
        }
    }
}

/// Trains on the `Train` entities of `roles`, selecting on `Val`.
pub fn train(ds: &Dataset, roles: &[SplitRole], mcfg: &ModelConfig, tcfg: &TrainConfig) -> Result<TrainedModel> {
    mcfg.validate()?;
    tcfg.validate()?;
    check_roles(ds, roles)?;
    if mcfg.task != ds.task() || mcfg.num_classes != ds.num_classes() {
        return Err(Error::InvalidArgument("model config does not match dataset task".into()));
    }
    if !roles.contains(&SplitRole::Train) {
        return Err(Error::InvalidArgument("empty training split".into()));
    }
    if !roles.contains(&SplitRole::Val) {
        return Err(Error::InvalidArgument("empty validation split".into()));
    }
    let prep = Prepared::new(ds, mcfg)?;
    let val = prep.eval_set(roles, SplitRole::Val);
    let train_members = prep.members(roles, SplitRole::Train);
    let transductive = ds.task() == Task::TransductiveNodeClassification;
    let full_batch = transductive.then(|| {
        let (rows, targets) = prep.rows(&[0], Some((roles, SplitRole::Train)));
        (prep.batch(&[0]), rows, targets)
    });

    let mut params = Params::init(mcfg, &mut rng::rng_for(tcfg.seed, "init", &[]));
    let mut adam = Adam::new(&params);
    let mut lr = tcfg.lr;
    let mut history = Vec::new();
    let mut best = (f64::NEG_INFINITY, params.clone(), 0usize);
    let mut best_val_loss = f64::INFINITY;
    let (mut plateau, mut stale) = (0usize, 0usize);

    for epoch in 0..tcfg.max_epochs {
        let mut loss_sum = 0.0;
        let mut rows_seen = 0usize;
        let mut step = |b: &Batch, rows: &[usize], targets: &[usize], params: &mut Params| -> Result<()> {
            let fwd = model::forward(params, mcfg, b, Mode::Train);
            let (loss, d_logits) = model::cross_entropy(&fwd.logits, rows, targets);
            if !loss.is_finite() {
                return Err(Error::Numerical(format!("non-finite training loss at epoch {epoch}")));
            }
            let grads = model::backward(params, mcfg, b, &fwd, &d_logits);
            adam.step(params, &grads, lr, tcfg);
            update_running_stats(params, &fwd, b.num_nodes(), tcfg.bn_momentum);
            loss_sum += loss * rows.len() as f64;
            rows_seen += rows.len();
            Ok(())
        };
        if let Some((b, rows, targets)) = &full_batch {
            step(b, rows, targets, &mut params)?;
        } else {
            let mut order = train_members.clone();
            order.shuffle(&mut rng::rng_for(tcfg.seed, "batches", &[epoch as u64]));
            for chunk in order.chunks(tcfg.batch_size) {
                let (rows, targets) = prep.rows(chunk, None);
                step(&prep.batch(chunk), &rows, &targets, &mut params)?;
            }
        }
        if !params.all_finite() {
            return Err(Error::Numerical(format!("non-finite parameters at epoch {epoch}")));
        }
        let v = run_eval(&params, mcfg, &val);
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / rows_seen.max(1) as f64,
            val_loss: v.loss,
            val_auroc: v.auroc,
            lr,
        });

        if v.loss < best_val_loss * (1.0 - 1e-4) {
            best_val_loss = v.loss;
            plateau = 0;
        } else {
            plateau += 1;
            if plateau >= tcfg.plateau_patience {
                lr *= tcfg.lr_decay_factor;
                plateau = 0;
            }
        }
        // validation AUROC selects; loss stands in when AUROC is undefined
        let score = v.auroc.unwrap_or(-v.loss);
        if score > best.0 {
            best = (score, params.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= tcfg.early_stop_patience {
                break;
            }
        }
    }
    Ok(TrainedModel {
        config: mcfg.clone(),
        train_config: tcfg.clone(),
        params: best.1,
        history,
        best_epoch: best.2,
        manifest: None,
    })
}

/// Loss and AUROC of `model` on the entities of `roles` with role `role`.
pub fn evaluate(model: &TrainedModel, ds: &Dataset, roles: &[SplitRole], role: SplitRole) -> Result<EvalResult> {
    check_roles(ds, roles)?;
    if model.config.task != ds.task() {
        return Err(Error::InvalidArgument("model task does not match dataset task".into()));
    }
    let prep = Prepared::new(ds, &model.config)?;
    Ok(run_eval(&model.params, &model.config, &prep.eval_set(roles, role)))
}

/// Raw class scores: one row for graph tasks, one row per node otherwise.
pub fn predict(model: &TrainedModel, g: &Graph) -> Result<Array2<f64>> {
    check_features(&model.config, g)?;
    let t = GraphTensors::new(g, model.config.conv_kind);
    let b = Batch::new(&[&t]);
    Ok(model::forward(&model.params, &model.config, &b, Mode::Eval).logits)
}
