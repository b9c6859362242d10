//! Principal component analysis by singular value decomposition.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `loadings[j][c]`: weight of column `j` in component `c`.
    pub loadings: Vec<Vec<f64>>,
    /// `coordinates[i][c]`: score of row `i` on component `c`.
    pub coordinates: Vec<Vec<f64>>,
    /// Sample variance along each component.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Column-centered (unscaled) PCA with components in decreasing variance and
/// the largest-magnitude loading of each component made positive.
pub fn pca(row_ids: &[String], col_ids: &[String], rows: &[Vec<f64>]) -> Result<PcaResult> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidArgument("PCA needs at least two rows".into()));
    }
    let p = col_ids.len();
    if row_ids.len() != n || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Shape("PCA ids and matrix disagree".into()));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("PCA needs at least one column".into()));
    }
    let mut x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    for j in 0..p {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let mut loadings = vec![vec![0.0; r]; p];
    let mut explained_variance = Vec::with_capacity(r);
    let mut explained_variance_ratio = Vec::with_capacity(r);
    for (c, &k) in order.iter().enumerate() {
        let comp: Vec<f64> = v_t.row(k).iter().copied().collect();
        let pivot = (0..p).fold(0, |best, j| if comp[j].abs() > comp[best].abs() { j } else { best });
        let sign = if comp[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            loadings[j][c] = sign * comp[j];
        }
        let s2 = svd.singular_values[k].powi(2);
        explained_variance.push(s2 / (n - 1) as f64);
        explained_variance_ratio.push(if total > 0.0 { s2 / total } else { 0.0 });
    }
    let coordinates = (0..n)
        .map(|i| (0..r).map(|c| (0..p).map(|j| x[(i, j)] * loadings[j][c]).sum()).collect())
        .collect();
    Ok(PcaResult {
        rows: row_ids.to_vec(),
        columns: col_ids.to_vec(),
        loadings,
        coordinates,
        explained_variance,
        explained_variance_ratio,
    })
}
