//! Perturbation-based sensitivity profiling of graph learning datasets.
//!
//! A dataset is perturbed in thirteen ways (node-feature and structure
//! perturbations), a reference message-passing model is trained on each
//! perturbed copy, and the ratio of test AUROC to the unperturbed baseline
//! forms the dataset's sensitivity profile. Profiles of many datasets are then
//! clustered with Ward linkage and projected with PCA.

pub mod dec;
pub mod error;
pub mod graph;
pub mod io;
pub mod manifest;
pub mod mpnn;
pub mod perturb;
pub mod profiler;
pub mod rng;
pub mod spectral;
pub mod synthgen;
pub mod taxonomy;

pub use error::{Error, Result};
pub use graph::{preprocess, Dataset, DegreeVector, Graph, RawGraph, SplitRole, Task};
pub use perturb::{perturb_dataset, PerturbConfig, PerturbationKind};
pub use spectral::{Band, LaplacianKind, SpectralDecomposition};
pub use manifest::RunManifest;
pub use mpnn::{ConvKind, ModelConfig, TrainConfig, TrainedModel};
pub use profiler::{ProfileConfig, SensitivityMatrix};
pub use synthgen::{Family, GenSpec};
pub use taxonomy::{Dendrogram, PcaResult, Taxonomy};
