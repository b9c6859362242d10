//! Parameter tensors and their flat views.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConvKind, ModelConfig};
use crate::dec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    #[serde(with = "dec::array2")]
    pub w: Array2<f64>,
    #[serde(with = "dec::array1")]
    pub b: Array1<f64>,
}

impl Linear {
    /// Uniform in `±1/sqrt(fan_in)` for weights and bias.
    pub fn init<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        Linear {
            w: Array2::from_shape_simple_fn((fan_in, fan_out), || rng.gen_range(-bound..bound)),
            b: Array1::from_shape_simple_fn(fan_out, || rng.gen_range(-bound..bound)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Linear {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    #[serde(with = "dec::array1")]
    pub gamma: Array1<f64>,
    #[serde(with = "dec::array1")]
    pub beta: Array1<f64>,
    #[serde(with = "dec::array1")]
    pub running_mean: Array1<f64>,
    #[serde(with = "dec::array1")]
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    pub fn new(dim: usize) -> Self {
        BatchNorm {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
            running_mean: Array1::zeros(dim),
            running_var: Array1::ones(dim),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = Array1::zeros(self.gamma.raw_dim());
        BatchNorm {
            gamma: z.clone(),
            beta: z.clone(),
            running_mean: z.clone(),
            running_var: z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Conv {
    Gcn {
        lin: Linear,
    },
    Gin {
        #[serde(with = "dec::array1")]
        eps: Array1<f64>,
        lin1: Linear,
        lin2: Linear,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub conv: Conv,
    pub bn: Option<BatchNorm>,
}

/// All tensors of one model. Gradients reuse this type (running statistics
/// stay zero there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub embed: Linear,
    pub layers: Vec<Layer>,
    pub head1: Linear,
    pub head2: Linear,
}

impl Params {
    pub fn init<R: Rng>(cfg: &ModelConfig, rng: &mut R) -> Self {
        let h = cfg.hidden_dim;
        let embed = Linear::init(cfg.input_dim, h, rng);
        let layers = (0..cfg.num_conv_layers)
            .map(|_| Layer {
                conv: match cfg.conv_kind {
                    ConvKind::Gcn => Conv::Gcn {
                        lin: Linear::init(h, h, rng),
                    },
                    ConvKind::Gin => Conv::Gin {
                        eps: Array1::zeros(1),
                        lin1: Linear::init(h, h, rng),
                        lin2: Linear::init(h, h, rng),
                    },
                },
                bn: cfg.use_batch_norm.then(|| BatchNorm::new(h)),
            })
            .collect();
        let head1 = Linear::init(h, cfg.head_hidden_dim, rng);
        let head2 = Linear::init(cfg.head_hidden_dim, cfg.num_classes, rng);
        Params {
            embed,
            layers,
            head1,
            head2,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Params {
            embed: self.embed.zeros_like(),
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    conv: match &l.conv {
                        Conv::Gcn { lin } => Conv::Gcn { lin: lin.zeros_like() },
                        Conv::Gin { lin1, lin2, .. } => Conv::Gin {
                            eps: Array1::zeros(1),
                            lin1: lin1.zeros_like(),
                            lin2: lin2.zeros_like(),
                        },
                    },
                    bn: l.bn.as_ref().map(BatchNorm::zeros_like),
                })
                .collect(),
            head1: self.head1.zeros_like(),
            head2: self.head2.zeros_like(),
        }
    }

    /// Trainable tensors as flat slices, with group names, in a fixed order.
    pub fn groups(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        push_linear(&mut out, "embed", &self.embed);
        for (i, l) in self.layers.iter().enumerate() {
            match &l.conv {
                Conv::Gcn { lin } => push_linear(&mut out, &format!("conv{i}"), lin),
                Conv::Gin { eps, lin1, lin2 } => {
                    out.push((format!("conv{i}.eps"), slice(eps)));
                    push_linear(&mut out, &format!("conv{i}.mlp1"), lin1);
                    push_linear(&mut out, &format!("conv{i}.mlp2"), lin2);
                }
            }
            if let Some(bn) = &l.bn {
                out.push((format!("bn{i}.gamma"), slice(&bn.gamma)));
                out.push((format!("bn{i}.beta"), slice(&bn.beta)));
            }
        }
        push_linear(&mut out, "head1", &self.head1);
        push_linear(&mut out, "head2", &self.head2);
        out
    }

    /// Mutable counterpart of [`Params::groups`], same order.
    pub fn groups_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        push_linear_mut(&mut out, &mut self.embed);
        for l in &mut self.layers {
            match &mut l.conv {
                Conv::Gcn { lin } => push_linear_mut(&mut out, lin),
                Conv::Gin { eps, lin1, lin2 } => {
                    out.push(slice_mut(eps));
                    push_linear_mut(&mut out, lin1);
                    push_linear_mut(&mut out, lin2);
                }
            }
            if let Some(bn) = &mut l.bn {
                out.push(slice_mut(&mut bn.gamma));
                out.push(slice_mut(&mut bn.beta));
            }
        }
        push_linear_mut(&mut out, &mut self.head1);
        push_linear_mut(&mut out, &mut self.head2);
        out
    }

    pub fn num_trainable(&self) -> usize {
        self.groups().iter().map(|(_, s)| s.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.groups().iter().all(|(_, s)| s.iter().all(|v| v.is_finite()))
    }
}

fn slice<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> &[f64] {
    a.as_slice().expect("parameters are contiguous")
}

fn slice_mut<D: ndarray::Dimension>(a: &mut ndarray::Array<f64, D>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are contiguous")
}

fn push_linear<'a>(out: &mut Vec<(String, &'a [f64])>, name: &str, l: &'a Linear) {
    out.push((format!("{name}.w"), slice(&l.w)));
    out.push((format!("{name}.b"), slice(&l.b)));
}

fn push_linear_mut<'a>(out: &mut Vec<&'a mut [f64]>, l: &'a mut Linear) {
    out.push(slice_mut(&mut l.w));
    out.push(slice_mut(&mut l.b));
}
