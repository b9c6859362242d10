//! Ward clustering, PCA and Pearson correlations over sensitivity profiles.

mod pca;
mod ward;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::PerturbationKind;
use crate::profiler::SensitivityMatrix;

pub use pca::{pca, PcaResult};
pub use ward::{cut, ward_cluster, Dendrogram, Merge};

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "correlated vectors differ in length");
    let n = a.len() as f64;
    if a.len() < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Column-by-column Pearson matrix of `rows`; undefined entries are `None`.
pub fn pert_correlation(rows: &[Vec<f64>]) -> Result<Vec<Vec<Option<f64>>>> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument("correlation needs at least two rows".into()));
    }
    let p = rows[0].len();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    Ok((0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if i == j {
                        pearson(&cols[i], &cols[i]).map(|_| 1.0)
                    } else {
                        pearson(&cols[i], &cols[j])
                    }
                })
                .collect()
        })
        .collect())
}

/// Pearson correlation of the unclamped log2 entries of two matrices over
/// the perturbation cells valued in both (`Original` excluded).
pub fn model_correlation(a: &SensitivityMatrix, b: &SensitivityMatrix) -> Result<f64> {
    if a.rows != b.rows || a.columns != b.columns {
        return Err(Error::Shape("matrices are not aligned on dataset and perturbation ids".into()));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (ra, rb) in a.log2_ratio.iter().zip(&b.log2_ratio) {
        for (j, (va, vb)) in ra.iter().zip(rb).enumerate() {
            if a.columns[j] == PerturbationKind::Original {
                continue;
            }
            if let (Some(x), Some(y)) = (va, vb) {
                xs.push(*x);
                ys.push(*y);
            }
        }
    }
    pearson(&xs, &ys).ok_or_else(|| Error::Numerical("model correlation undefined (constant profiles)".into()))
}

/// Everything `taxonomize` emits for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<crate::manifest::RunManifest>,
    pub rows: Vec<String>,
    pub columns: Vec<PerturbationKind>,
    pub dendrogram: Dendrogram,
    pub newick: String,
    pub k: usize,
    pub clusters: Vec<usize>,
    pub pca: PcaResult,
    pub pert_correlation: Vec<Vec<Option<f64>>>,
}

/// Clusters, projects and correlates the clamped log2 profiles.
pub fn taxonomize(m: &SensitivityMatrix, k: usize) -> Result<Taxonomy> {
    let (columns, rows) = m.clustering_input();
    if columns.is_empty() {
        return Err(Error::InvalidArgument("no perturbation column is valued for every dataset".into()));
    }
    let dendrogram = ward_cluster(&m.rows, &rows)?;
    let clusters = cut(&dendrogram, k)?;
    let names: Vec<String> = columns.iter().map(|c| c.name()).collect();
    let pca = pca(&m.rows, &names, &rows)?;
    let pert_correlation = pert_correlation(&rows)?;
    Ok(Taxonomy {
        manifest: None,
        rows: m.rows.clone(),
        newick: dendrogram.newick(),
        columns,
        dendrogram,
        k,
        clusters,
        pca,
        pert_correlation,
    })
}
