//! The dataset perturbations: six on node features, seven on structure.
//!
//! Every perturbation maps a graph to a graph. Stochastic ones draw from an
//! RNG stream derived from `(seed, perturbation tag, graph index)`, so a
//! perturbed dataset does not depend on the order graphs are processed in.

mod features;
mod fiedler;
mod structure;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, Task};
use crate::rng;
use crate::spectral::{Band, DEFAULT_DENSE_LIMIT};

pub use features::{bandpass, no_node_ftrs, node_deg, rand_ftrs, BandMode};
pub use fiedler::{fiedler_bisect, fiedler_frag, ratio_cut_objective, FiedlerConfig, FiedlerOutcome};
pub use structure::{frag_k, fully_conn, no_edges, rand_rewire, RewireOutcome, RewireStatus};

/// The baseline plus the thirteen perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbationKind {
    Original,
    LowPass,
    MidPass,
    HighPass,
    NoNodeFtrs,
    NodeDeg,
    RandFtrs,
    RandRewire,
    NoEdges,
    FullyConn,
    FragK(u8),
    FiedlerFrag,
}

impl PerturbationKind {
    /// Column order used by sensitivity matrices.
    pub const ALL: [PerturbationKind; 14] = [
        PerturbationKind::Original,
        PerturbationKind::LowPass,
        PerturbationKind::MidPass,
        PerturbationKind::HighPass,
        PerturbationKind::NoNodeFtrs,
        PerturbationKind::NodeDeg,
        PerturbationKind::RandFtrs,
        PerturbationKind::RandRewire,
        PerturbationKind::NoEdges,
        PerturbationKind::FullyConn,
        PerturbationKind::FragK(1),
        PerturbationKind::FragK(2),
        PerturbationKind::FragK(3),
        PerturbationKind::FiedlerFrag,
    ];

    pub fn name(self) -> String {
        match self {
            PerturbationKind::FragK(k) => format!("Frag-k{k}"),
            other => format!("{other:?}"),
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            PerturbationKind::RandFtrs | PerturbationKind::RandRewire | PerturbationKind::FragK(_)
        )
    }

    pub fn is_structural(self) -> bool {
        matches!(
            self,
            PerturbationKind::RandRewire
                | PerturbationKind::NoEdges
                | PerturbationKind::FullyConn
                | PerturbationKind::FragK(_)
                | PerturbationKind::FiedlerFrag
        )
    }

    pub fn is_feature(self) -> bool {
        self != PerturbationKind::Original && !self.is_structural()
    }

    /// Perturbations not run on transductive datasets.
    pub fn inductive_only(self) -> bool {
        matches!(self, PerturbationKind::FullyConn | PerturbationKind::FiedlerFrag)
    }

    /// Parses a name plus the separate `k` used by the CLI (`frag-k --k 2`).
    pub fn parse_with_k(name: &str, k: Option<u8>) -> Result<Self> {
        let kind: PerturbationKind = name.parse()?;
        match (kind, k) {
            (PerturbationKind::FragK(_), Some(k)) => {
                if k == 0 {
                    return Err(Error::InvalidArgument("Frag-k needs k >= 1".into()));
                }
                Ok(PerturbationKind::FragK(k))
            }
            (other, _) => Ok(other),
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let kind = match key.as_str() {
            "original" => PerturbationKind::Original,
            "lowpass" => PerturbationKind::LowPass,
            "midpass" => PerturbationKind::MidPass,
            "highpass" => PerturbationKind::HighPass,
            "nonodeftrs" => PerturbationKind::NoNodeFtrs,
            "nodedeg" => PerturbationKind::NodeDeg,
            "randftrs" => PerturbationKind::RandFtrs,
            "randrewire" => PerturbationKind::RandRewire,
            "noedges" => PerturbationKind::NoEdges,
            "fullyconn" => PerturbationKind::FullyConn,
            "fiedlerfrag" => PerturbationKind::FiedlerFrag,
            "fragk" => PerturbationKind::FragK(1),
            other => match other.strip_prefix("fragk").and_then(|k| k.parse::<u8>().ok()) {
                Some(k) if k >= 1 => PerturbationKind::FragK(k),
                _ => return Err(Error::InvalidArgument(format!("unknown perturbation '{s}'"))),
            },
        };
        Ok(kind)
    }
}

impl Serialize for PerturbationKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for PerturbationKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Knobs shared by all perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    pub band_mode: BandMode,
    pub dense_limit: usize,
    /// Upper bound on the one-hot degree width; `None` means the dataset max.
    pub node_deg_cap: Option<usize>,
    /// Largest transductive graph `FullyConn` will densify.
    pub fully_conn_guard: usize,
    pub rewire_fraction: f64,
    pub fiedler: FiedlerConfig,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            band_mode: BandMode::Auto,
            dense_limit: DEFAULT_DENSE_LIMIT,
            node_deg_cap: None,
            fully_conn_guard: 10_000,
            rewire_fraction: 0.5,
            fiedler: FiedlerConfig::default(),
        }
    }
}

/// Per-graph notes recorded alongside a perturbed dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNote {
    pub graph: usize,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbMeta {
    pub kind: PerturbationKind,
    pub seed: u64,
    pub config: PerturbConfig,
    pub notes: Vec<GraphNote>,
}

#[derive(Debug, Clone)]
pub struct PerturbedDataset {
    pub dataset: Dataset,
    pub meta: PerturbMeta,
}

/// Applies `kind` to every graph of `ds`.
pub fn perturb_dataset(ds: &Dataset, kind: PerturbationKind, cfg: &PerturbConfig, seed: u64) -> Result<PerturbedDataset> {
    if let PerturbationKind::FragK(0) = kind {
        return Err(Error::InvalidArgument("Frag-k needs k >= 1".into()));
    }
    if !(cfg.rewire_fraction > 0.0 && cfg.rewire_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rewire fraction {} outside (0, 1]",
            cfg.rewire_fraction
        )));
    }
    if kind == PerturbationKind::FullyConn
        && ds.task() == Task::TransductiveNodeClassification
        && ds.total_nodes() > cfg.fully_conn_guard
    {
        return Err(Error::Resource(format!(
            "FullyConn on a transductive graph with {} nodes exceeds the guard of {}",
            ds.total_nodes(),
            cfg.fully_conn_guard
        )));
    }
    let deg_cap = {
        let max = ds.max_degree();
        cfg.node_deg_cap.map_or(max, |c| c.min(max))
    };
    let tag = kind.name();
    let results: Vec<Result<(Graph, Vec<String>)>> = ds
        .graphs()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut rng = rng::rng_for(seed, &tag, &[i as u64]);
            let mut flags = Vec::new();
            let out = match kind {
                PerturbationKind::Original => g.clone(),
                PerturbationKind::LowPass => bandpass(g, Band::Low, cfg.band_mode, cfg.dense_limit)?,
                PerturbationKind::MidPass => bandpass(g, Band::Mid, cfg.band_mode, cfg.dense_limit)?,
                PerturbationKind::HighPass => bandpass(g, Band::High, cfg.band_mode, cfg.dense_limit)?,
                PerturbationKind::NoNodeFtrs => no_node_ftrs(g),
                PerturbationKind::NodeDeg => node_deg(g, deg_cap),
                PerturbationKind::RandFtrs => rand_ftrs(g, &mut rng),
                PerturbationKind::RandRewire => {
                    let o = rand_rewire(g, &mut rng, cfg.rewire_fraction);
                    match o.status {
                        RewireStatus::Complete => {}
                        RewireStatus::NoLegalSwap => flags.push("no legal swap".to_string()),
                        RewireStatus::Partial => flags.push(format!("partial rewire {}/{}", o.rewired, o.quota)),
                        RewireStatus::TooFewEdges => flags.push("fewer than two edges".to_string()),
                    }
                    o.graph
                }
                PerturbationKind::NoEdges => no_edges(g),
                PerturbationKind::FullyConn => fully_conn(g),
                PerturbationKind::FragK(k) => frag_k(g, k as usize, &mut rng),
                PerturbationKind::FiedlerFrag => {
                    let o = fiedler_frag(g, &cfg.fiedler, cfg.dense_limit)?;
                    if o.iterations == cfg.fiedler.max_iterations {
                        flags.push("iteration cap reached".to_string());
                    }
                    o.graph
                }
            };
            Ok((out, flags))
        })
        .collect();
    let mut graphs = Vec::with_capacity(results.len());
    let mut notes = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (g, flags) = r?;
        if !flags.is_empty() {
            notes.push(GraphNote { graph: i, flags });
        }
        graphs.push(g);
    }
    Ok(PerturbedDataset {
        dataset: ds.with_graphs(graphs)?,
        meta: PerturbMeta {
            kind,
            seed,
            config: cfg.clone(),
            notes,
        },
    })
}
