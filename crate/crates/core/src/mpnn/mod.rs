//! Reference message-passing model: linear embedding, stacked GCN or GIN
//! convolutions with batch norm and residual connections, optional mean
//! pooling, and a two-layer classifier head. Gradients are derived by hand.

pub mod batch;
pub mod metrics;
pub mod model;
pub mod params;
pub mod train;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dec;
use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, Task};

pub use metrics::{auroc, macro_auroc, multilabel_auroc};
pub use model::{Forward, Mode};
pub use params::Params;
pub use train::{evaluate, predict, train, EpochRecord, EvalResult, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvKind {
    Gcn,
    Gin,
}

impl ConvKind {
    pub fn name(self) -> &'static str {
        match self {
            ConvKind::Gcn => "gcn",
            ConvKind::Gin => "gin",
        }
    }
}

impl fmt::Display for ConvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(ConvKind::Gcn),
            "gin" => Ok(ConvKind::Gin),
            _ => Err(Error::InvalidArgument(format!("unknown model '{s}' (expected gcn or gin)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Mean,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub conv_kind: ConvKind,
    pub task: Task,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_conv_layers: usize,
    pub head_hidden_dim: usize,
    pub num_classes: usize,
    pub use_batch_norm: bool,
    pub residual: bool,
    pub pooling: Pooling,
}

impl ModelConfig {
    pub const DEFAULT_HIDDEN: usize = 64;
    pub const DEFAULT_LAYERS: usize = 5;

    /// Blueprint configuration for a dataset's feature width and task.
    pub fn for_dataset(ds: &Dataset, conv_kind: ConvKind) -> Self {
        let input_dim = ds.graphs().first().map_or(0, Graph::feature_dim);
        ModelConfig {
            conv_kind,
            task: ds.task(),
            input_dim,
            hidden_dim: Self::DEFAULT_HIDDEN,
            num_conv_layers: Self::DEFAULT_LAYERS,
            head_hidden_dim: Self::DEFAULT_HIDDEN,
            num_classes: ds.num_classes(),
            use_batch_norm: ds.task().is_inductive(),
            residual: true,
            pooling: if ds.task().is_graph_level() { Pooling::Mean } else { Pooling::None },
        }
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden_dim = hidden;
        self.head_hidden_dim = hidden;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_conv_layers == 0 || self.hidden_dim == 0 || self.head_hidden_dim == 0 {
            return Err(Error::InvalidArgument("layer count and widths must be positive".into()));
        }
        if self.num_classes == 0 {
            return Err(Error::InvalidArgument("num_classes must be positive".into()));
        }
        if (self.pooling == Pooling::Mean) != self.task.is_graph_level() {
            return Err(Error::InvalidArgument("mean pooling is used exactly for graph classification".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(with = "dec::scalar")]
    pub lr: f64,
    #[serde(with = "dec::scalar")]
    pub beta1: f64,
    #[serde(with = "dec::scalar")]
    pub beta2: f64,
    #[serde(with = "dec::scalar")]
    pub adam_eps: f64,
    #[serde(with = "dec::scalar")]
    pub lr_decay_factor: f64,
    pub plateau_patience: usize,
    pub early_stop_patience: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    #[serde(with = "dec::scalar")]
    pub bn_momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            lr_decay_factor: 0.5,
            plateau_patience: 10,
            early_stop_patience: 30,
            max_epochs: 300,
            batch_size: 32,
            bn_momentum: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor < 1.0) {
            return Err(Error::InvalidArgument("lr_decay_factor must lie in (0, 1)".into()));
        }
        if !(self.lr > 0.0) || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidArgument("lr, batch_size and max_epochs must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.adam_eps > 0.0) {
            return Err(Error::InvalidArgument("Adam moments must lie in [0, 1) and eps be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.bn_momentum) {
            return Err(Error::InvalidArgument("bn_momentum must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Eval-mode node embeddings of `g` after the last convolution.
pub fn node_embeddings(params: &Params, cfg: &ModelConfig, g: &Graph) -> Result<Array2<f64>> {
    check_features(cfg, g)?;
    let t = batch::GraphTensors::new(g, cfg.conv_kind);
    let b = batch::Batch::new(&[&t]);
    Ok(model::forward(params, cfg, &b, Mode::Eval).embeddings().clone())
}

pub(crate) fn check_features(cfg: &ModelConfig, g: &Graph) -> Result<()> {
    if g.feature_dim() != cfg.input_dim {
        return Err(Error::Shape(format!(
            "graph has {} feature columns, model expects {}",
            g.feature_dim(),
            cfg.input_dim
        )));
    }
    Ok(())
}
