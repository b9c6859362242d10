//! The dataset × perturbation × repeat experiment grid.

mod splits;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, SplitRole, Task};
use crate::mpnn::{self, ConvKind, ModelConfig, TrainConfig};
use crate::perturb::{perturb_dataset, PerturbConfig, PerturbationKind};
use crate::rng;

pub use splits::{repeat_roles, stratified_folds};

/// Repeats per cell when none are given.
pub const DEFAULT_REPEATS: usize = 10;
/// Folds used for datasets without predefined splits.
pub const CV_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub model: ConvKind,
    pub hidden_dim: usize,
    pub repeats: usize,
    pub seed: u64,
    pub perturbations: Vec<PerturbationKind>,
    /// Template for every training run; its seed is replaced per run.
    pub train: TrainConfig,
    pub perturb: PerturbConfig,
}

impl ProfileConfig {
    pub fn new(model: ConvKind, seed: u64) -> Self {
        ProfileConfig {
            model,
            hidden_dim: ModelConfig::DEFAULT_HIDDEN,
            repeats: DEFAULT_REPEATS,
            seed,
            perturbations: PerturbationKind::ALL.to_vec(),
            train: TrainConfig::default(),
            perturb: PerturbConfig::default(),
        }
    }

    /// Perturbation columns with `Original` first and duplicates removed.
    pub fn columns(&self) -> Vec<PerturbationKind> {
        let mut seen = BTreeSet::new();
        std::iter::once(PerturbationKind::Original)
            .chain(self.perturbations.iter().copied())
            .filter(|k| seen.insert(*k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// Not applicable to this dataset (flagged, not an error).
    Skipped,
    /// Training failed after the retry or the test AUROC is undefined.
    Invalid,
}

/// Outcome of all repeats of one (dataset, perturbation) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    /// Per-repeat test AUROC.
    pub aurocs: Vec<f64>,
    /// Training seed actually used by each repeat (after any retry).
    pub train_seeds: Vec<u64>,
    /// Perturbation seed of each repeat.
    pub perturb_seeds: Vec<u64>,
    pub mean_auroc: Option<f64>,
}

impl Cell {
    fn skipped(reason: impl Into<String>) -> Self {
        Cell {
            status: CellStatus::Skipped,
            reason: Some(reason.into()),
            aurocs: Vec::new(),
            train_seeds: Vec::new(),
            perturb_seeds: Vec::new(),
            mean_auroc: None,
        }
    }
}

/// Rows are datasets, columns perturbations (`Original` first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityMatrix {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<crate::manifest::RunManifest>,
    pub model: ConvKind,
    pub rows: Vec<String>,
    pub columns: Vec<PerturbationKind>,
    /// `mean AUROC(perturbed) / mean AUROC(original)`.
    pub ratio: Vec<Vec<Option<f64>>>,
    /// Unclamped `log2` of `ratio`.
    pub log2_ratio: Vec<Vec<Option<f64>>>,
    pub cells: Vec<Vec<Cell>>,
}

impl SensitivityMatrix {
    fn from_cells(model: ConvKind, rows: Vec<String>, columns: Vec<PerturbationKind>, cells: Vec<Vec<Cell>>) -> Self {
        let ratio: Vec<Vec<Option<f64>>> = cells
            .iter()
            .map(|row| {
                let base = row[0].mean_auroc.filter(|&b| b > 0.0);
                row.iter()
                    .map(|c| match (c.status, c.mean_auroc, base) {
                        (CellStatus::Ok, Some(m), Some(b)) => Some(m / b),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        let log2_ratio = ratio
            .iter()
            .map(|row| row.iter().map(|r| r.filter(|&r| r > 0.0).map(f64::log2)).collect())
            .collect();
        SensitivityMatrix {
            manifest: None,
            model,
            rows,
            columns,
            ratio,
            log2_ratio,
            cells,
        }
    }

    /// Ids of cells with no value, as `(row, column)` names.
    pub fn missing(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, row) in self.log2_ratio.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((self.rows[i].clone(), self.columns[j].name()));
                }
            }
        }
        out
    }

    /// Clamped log2 entries over perturbation columns present in every row;
    /// `Original` (identically zero) is dropped.
    pub fn clustering_input(&self) -> (Vec<PerturbationKind>, Vec<Vec<f64>>) {
        let keep: Vec<usize> = (0..self.columns.len())
            .filter(|&j| self.columns[j] != PerturbationKind::Original)
            .filter(|&j| self.log2_ratio.iter().all(|row| row[j].is_some()))
            .collect();
        let cols = keep.iter().map(|&j| self.columns[j]).collect();
        let values = self
            .log2_ratio
            .iter()
            .map(|row| keep.iter().map(|&j| row[j].expect("kept").clamp(-1.0, 1.0)).collect())
            .collect();
        (cols, values)
    }

    /// Percentage ratios, one line per dataset; skipped cells are empty.
    pub fn to_percent_csv(&self) -> String {
        let mut out = String::from("dataset");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name());
        }
        out.push('\n');
        for (name, row) in self.rows.iter().zip(&self.ratio) {
            out.push_str(name);
            for v in row {
                out.push(',');
                if let Some(r) = v {
                    out.push_str(&format!("{:.2}", 100.0 * r));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Per-seed statistics of one stochastic perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedVariance {
    pub dataset: String,
    pub perturbation: PerturbationKind,
    pub aurocs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    /// `100 · std / mean`.
    pub cv_percent: f64,
}

fn is_applicable(ds: &Dataset, kind: PerturbationKind) -> Option<String> {
    if ds.task() == Task::TransductiveNodeClassification && kind.inductive_only() {
        return Some(format!("{kind} is not run on transductive datasets"));
    }
    let bandpass = matches!(
        kind,
        PerturbationKind::LowPass | PerturbationKind::MidPass | PerturbationKind::HighPass
    );
    if bandpass && ds.graphs().first().map_or(0, |g| g.feature_dim()) == 0 {
        return Some("band-pass filtering needs node features".into());
    }
    None
}

struct RunOutcome {
    auroc: Option<f64>,
    train_seed: u64,
    perturb_seed: u64,
}

/// Seeds are keyed by names, so a run does not depend on which other cells
/// share the grid.
fn one_run(ds: &Dataset, kind: PerturbationKind, repeat: usize, cfg: &ProfileConfig) -> Result<RunOutcome> {
    let perturb_seed = rng::derive_seed(cfg.seed, &format!("perturb/{}/{}", ds.name, kind.name()), &[repeat as u64]);
    let perturbed = perturb_dataset(ds, kind, &cfg.perturb, perturb_seed)?.dataset;
    let roles = repeat_roles(ds, repeat, cfg.seed)?;
    let mcfg = ModelConfig::for_dataset(&perturbed, cfg.model).with_hidden(cfg.hidden_dim);
    let mut last_err = None;
    for attempt in 0..2u64 {
        // shared across perturbations of one repeat
        let train_seed = rng::derive_seed(cfg.seed, &format!("train/{}", ds.name), &[repeat as u64, attempt]);
        let tcfg = TrainConfig {
            seed: train_seed,
            ..cfg.train.clone()
        };
        match mpnn::train(&perturbed, &roles, &mcfg, &tcfg) {
            Ok(model) => {
                let res = mpnn::evaluate(&model, &perturbed, &roles, SplitRole::Test)?;
                return Ok(RunOutcome {
                    auroc: res.auroc,
                    train_seed,
                    perturb_seed,
                });
            }
            Err(e @ Error::Numerical(_)) => {
                log::warn!("{} / {kind} / repeat {repeat}: {e}; retrying", ds.name);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("two failed attempts"))
}

fn assemble_cell(runs: Vec<Result<RunOutcome>>) -> Result<Cell> {
    let mut aurocs = Vec::new();
    let mut train_seeds = Vec::new();
    let mut perturb_seeds = Vec::new();
    let mut invalid = None;
    for r in runs {
        match r {
            Ok(o) => {
                train_seeds.push(o.train_seed);
                perturb_seeds.push(o.perturb_seed);
                match o.auroc {
                    Some(a) => aurocs.push(a),
                    None => invalid = Some("test AUROC undefined (single-class test split)".to_string()),
                }
            }
            Err(e @ Error::Numerical(_)) => invalid = Some(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    let status = if invalid.is_some() { CellStatus::Invalid } else { CellStatus::Ok };
    let mean_auroc = (status == CellStatus::Ok && !aurocs.is_empty()).then(|| aurocs.iter().sum::<f64>() / aurocs.len() as f64);
    Ok(Cell {
        status,
        reason: invalid,
        aurocs,
        train_seeds,
        perturb_seeds,
        mean_auroc,
    })
}

/// Trains and evaluates every (dataset, perturbation, repeat) combination.
pub fn run_grid(datasets: &[Dataset], cfg: &ProfileConfig) -> Result<SensitivityMatrix> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be positive".into()));
    }
    let mut names = BTreeSet::new();
    for ds in datasets {
        if !names.insert(ds.name.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate dataset id '{}'", ds.name)));
        }
    }
    let columns = cfg.columns();
    let tasks: Vec<(usize, usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..columns.len()).flat_map(move |c| (0..cfg.repeats).map(move |r| (d, c, r))))
        .filter(|&(d, c, _)| is_applicable(&datasets[d], columns[c]).is_none())
        .collect();
    let results: Vec<((usize, usize, usize), Result<RunOutcome>)> = tasks
        .into_par_iter()
        .map(|(d, c, r)| {
            log::info!("{} / {} / repeat {r}", datasets[d].name, columns[c]);
            ((d, c, r), one_run(&datasets[d], columns[c], r, cfg))
        })
        .collect();
    let mut by_cell: Vec<Vec<Vec<Result<RunOutcome>>>> = (0..datasets.len())
        .map(|_| (0..columns.len()).map(|_| Vec::new()).collect())
        .collect();
    // results arrive in task order, which is already (d, c, r) sorted
    for ((d, c, _), res) in results {
        by_cell[d][c].push(res);
    }
    let mut cells = Vec::with_capacity(datasets.len());
    for (d, row) in by_cell.into_iter().enumerate() {
        let mut out = Vec::with_capacity(columns.len());
        for (c, runs) in row.into_iter().enumerate() {
            out.push(match is_applicable(&datasets[d], columns[c]) {
                Some(reason) => Cell::skipped(reason),
                None => assemble_cell(runs)?,
            });
        }
        cells.push(out);
    }
    let rows = datasets.iter().map(|d| d.name.clone()).collect();
    Ok(SensitivityMatrix::from_cells(cfg.model, rows, columns, cells))
}

/// Spread of test AUROC over `num_seeds` draws of a stochastic perturbation.
pub fn seed_variance(ds: &Dataset, kind: PerturbationKind, num_seeds: usize, cfg: &ProfileConfig) -> Result<SeedVariance> {
    if !kind.is_stochastic() {
        return Err(Error::InvalidArgument(format!("{kind} is deterministic; seed variance needs a stochastic perturbation")));
    }
    if num_seeds < 2 {
        return Err(Error::InvalidArgument("seed variance needs at least two seeds".into()));
    }
    let runs: Vec<Result<RunOutcome>> = (0..num_seeds).into_par_iter().map(|r| one_run(ds, kind, r, cfg)).collect();
    let cell = assemble_cell(runs)?;
    if cell.status != CellStatus::Ok {
        return Err(Error::Numerical(cell.reason.unwrap_or_default()));
    }
    let n = cell.aurocs.len() as f64;
    let mean = cell.aurocs.iter().sum::<f64>() / n;
    let std = (cell.aurocs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(SeedVariance {
        dataset: ds.name.clone(),
        perturbation: kind,
        aurocs: cell.aurocs,
        mean,
        std,
        cv_percent: 100.0 * std / mean,
    })
}
