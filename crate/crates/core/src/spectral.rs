//! Laplacians, dense eigendecomposition, hard band-pass projection and the
//! degree-2 diffusion wavelet bank.
//!
//! Degree-0 nodes use `D^{-1/2} := 0`, so their rows of the normalized
//! Laplacian vanish and the diffusion operator `T = I - N/2` leaves them fixed.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_DENSE_LIMIT: usize = 3000;
pub const DENSE_LIMIT_ENV: &str = "GTAXO_DENSE_LIMIT";

/// Dense-eigendecomposition limit, honouring `GTAXO_DENSE_LIMIT`.
pub fn dense_limit_from_env() -> Result<usize> {
    match std::env::var(DENSE_LIMIT_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{DENSE_LIMIT_ENV}={v} is not a count"))),
        Err(_) => Ok(DEFAULT_DENSE_LIMIT),
    }
}

/// Combinatorial Laplacian `L = D - M`.
pub fn laplacian(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let mut l = Array2::zeros((n, n));
    for u in 0..n {
        l[[u, u]] = g.degree(u) as f64;
    }
    for &(u, v) in g.edges() {
        l[[u, v]] = -1.0;
        l[[v, u]] = -1.0;
    }
    l
}

fn inv_sqrt_degrees(g: &Graph) -> Vec<f64> {
    (0..g.num_nodes())
        .map(|u| match g.degree(u) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect()
}

/// Symmetric normalized Laplacian `D^{-1/2} L D^{-1/2}`; equals
/// `I - D^{-1/2} M D^{-1/2}` on nodes with positive degree and is zero on
/// isolated nodes.
pub fn normalized_laplacian(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let s = inv_sqrt_degrees(g);
    let mut m = Array2::zeros((n, n));
    for u in 0..n {
        if g.degree(u) > 0 {
            m[[u, u]] = 1.0;
        }
    }
    for &(u, v) in g.edges() {
        let w = -s[u] * s[v];
        m[[u, v]] = w;
        m[[v, u]] = w;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianKind {
    Combinatorial,
    Normalized,
}

/// Ascending eigenpairs of a graph Laplacian.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub kind: LaplacianKind,
    pub eigenvalues: Array1<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Array2<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Φ diag(h(λ)) Φᵀ`.
    pub fn filter_matrix(&self, h: impl Fn(f64) -> f64) -> Array2<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &lam) in scaled.axis_iter_mut(Axis(1)).zip(self.eigenvalues.iter()) {
            col *= h(lam);
        }
        scaled.dot(&self.eigenvectors.t())
    }

    /// `Φ diag(h(λ)) Φᵀ X`.
    pub fn apply_filter(&self, x: &Array2<f64>, h: impl Fn(f64) -> f64) -> Result<Array2<f64>> {
        if x.nrows() != self.len() {
            return Err(Error::Shape(format!(
                "signal has {} rows, decomposition has {}",
                x.nrows(),
                self.len()
            )));
        }
        let mut coeffs = self.eigenvectors.t().dot(x);
        for (mut row, &lam) in coeffs.axis_iter_mut(Axis(0)).zip(self.eigenvalues.iter()) {
            row *= h(lam);
        }
        Ok(self.eigenvectors.dot(&coeffs))
    }

    /// Dense reconstruction `Φ Λ Φᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.filter_matrix(|l| l)
    }
}

/// Dense symmetric eigendecomposition, sorted ascending with ties kept in
/// solver order; each eigenvector's first non-negligible entry is positive.
pub fn eigendecompose(m: &Array2<f64>, kind: LaplacianKind, dense_limit: usize) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!("matrix is {}x{}", n, m.ncols())));
    }
    if n > dense_limit {
        return Err(Error::Unsupported(format!(
            "{n} nodes exceed the dense eigendecomposition limit {dense_limit}"
        )));
    }
    let scale = m.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[[i, j]] - m[[j, i]]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let eig = SymmetricEigen::new(dm);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, j)]);
    refine(m, &mut values, &mut vectors, RESIDUAL_TOL * scale);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| values[i]));
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let v = vectors.column(src);
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |&x| if x < 0.0 { -1.0 } else { 1.0 });
        for r in 0..n {
            eigenvectors[[r, col]] = sign * v[r];
        }
    }
    Ok(SpectralDecomposition {
        kind,
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenpair residual (relative to the largest matrix entry) above which a
/// pair is refined.
const RESIDUAL_TOL: f64 = 1e-12;
/// Largest set of pairs refined together.
const REFINE_LIMIT: usize = 256;

/// Rayleigh–Ritz passes over the eigenpairs whose residual `|Mv - λv|∞`
/// exceeds `tol`.
fn refine(m: &Array2<f64>, values: &mut [f64], vectors: &mut Array2<f64>, tol: f64) {
    let n = values.len();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| (0..n).filter(|&j| m[[i, j]] != 0.0).map(|j| (j, m[[i, j]])).collect())
        .collect();
    for _ in 0..3 {
        let mut mv = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            let mut out = mv.row_mut(i);
            for &(j, w) in row {
                out.scaled_add(w, &vectors.row(j));
            }
        }
        let flagged: Vec<usize> = (0..n)
            .filter(|&c| (0..n).any(|i| (mv[[i, c]] - values[c] * vectors[[i, c]]).abs() > tol))
            .collect();
        if flagged.is_empty() || flagged.len() > REFINE_LIMIT {
            if !flagged.is_empty() {
                log::debug!("{} inexact eigenpairs left unrefined", flagged.len());
            }
            return;
        }
        let v = vectors.select(Axis(1), &flagged);
        let h = v.t().dot(&mv.select(Axis(1), &flagged));
        let h = (&h + &h.t()) * 0.5;
        let (mu, w) = jacobi_eigen(h);
        let rotated = v.dot(&w);
        for (k, &c) in flagged.iter().enumerate() {
            values[c] = mu[k];
            vectors.column_mut(c).assign(&rotated.column(k));
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix; returns
/// unsorted eigenvalues and the matching eigenvector columns.
fn jacobi_eigen(mut a: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let k = a.nrows();
    let mut v = Array2::<f64>::eye(k);
    for _ in 0..64 {
        let off: f64 = (0..k).flat_map(|p| ((p + 1)..k).map(move |q| (p, q))).map(|(p, q)| a[[p, q]].powi(2)).sum();
        let diag: f64 = (0..k).map(|p| a[[p, p]].powi(2)).sum();
        if off <= f64::EPSILON.powi(2) * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let (arp, arq) = (a[[r, p]], a[[r, q]]);
                    a[[r, p]] = c * arp - s * arq;
                    a[[r, q]] = s * arp + c * arq;
                }
                for r in 0..k {
                    let (apr, aqr) = (a[[p, r]], a[[q, r]]);
                    a[[p, r]] = c * apr - s * aqr;
                    a[[q, r]] = s * apr + c * aqr;
                }
                for r in 0..k {
                    let (vrp, vrq) = (v[[r, p]], v[[r, q]]);
                    v[[r, p]] = c * vrp - s * vrq;
                    v[[r, q]] = s * vrp + c * vrq;
                }
            }
        }
    }
    ((0..k).map(|p| a[[p, p]]).collect(), v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    Mid,
    High,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Low, Band::Mid, Band::High];
}

/// Contiguous eigen-index interval for hard band-pass filtering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyBand {
    pub band: Band,
    pub range: Range<usize>,
}

/// Splits `0..n` into three bands with ceiling boundaries
/// `⌈n/3⌉` and `⌈2n/3⌉`.
pub fn band_partition(n: usize) -> [FrequencyBand; 3] {
    let a = n.div_ceil(3);
    let b = (2 * n).div_ceil(3);
    [
        FrequencyBand { band: Band::Low, range: 0..a },
        FrequencyBand { band: Band::Mid, range: a..b },
        FrequencyBand { band: Band::High, range: b..n },
    ]
}

/// Projection `Φ I_band Φᵀ X` onto the eigenvectors of the chosen band.
pub fn hard_bandpass(x: &Array2<f64>, dec: &SpectralDecomposition, band: Band) -> Result<Array2<f64>> {
    let n = dec.len();
    if x.nrows() != n {
        return Err(Error::Shape(format!("signal has {} rows, decomposition has {n}", x.nrows())));
    }
    let range = band_partition(n)[band as usize].range.clone();
    let basis = dec.eigenvectors.slice(s![.., range]);
    Ok(basis.dot(&basis.t().dot(x)))
}

/// Dense projector `Φ I_band Φᵀ`.
pub fn band_projector(dec: &SpectralDecomposition, band: Band) -> Array2<f64> {
    let range = band_partition(dec.len())[band as usize].range.clone();
    let basis = dec.eigenvectors.slice(s![.., range]);
    basis.dot(&basis.t())
}

/// Dense diffusion operator `T = I - N/2`; on non-isolated nodes this is
/// `½(I + D^{-1/2} M D^{-1/2})`.
pub fn diffusion_operator(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let mut t = normalized_laplacian(g) * -0.5;
    for u in 0..n {
        t[[u, u]] += 1.0;
    }
    t
}

/// Sparse application of the diffusion operator.
#[derive(Debug, Clone)]
pub struct DiffusionOperator<'g> {
    graph: &'g Graph,
    inv_sqrt_deg: Vec<f64>,
}

impl<'g> DiffusionOperator<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        DiffusionOperator {
            graph,
            inv_sqrt_deg: inv_sqrt_degrees(graph),
        }
    }

    /// `T X` using one pass over the adjacency lists.
    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let n = self.graph.num_nodes();
        if x.nrows() != n {
            return Err(Error::Shape(format!("signal has {} rows for {n} nodes", x.nrows())));
        }
        let mut out = Array2::zeros(x.raw_dim());
        for u in 0..n {
            let mut row = out.row_mut(u);
            if self.graph.degree(u) == 0 {
                row.assign(&x.row(u));
                continue;
            }
            row.scaled_add(0.5, &x.row(u));
            for &v in self.graph.neighbors(u) {
                row.scaled_add(0.5 * self.inv_sqrt_deg[u] * self.inv_sqrt_deg[v], &x.row(v));
            }
        }
        Ok(out)
    }
}

/// Frequency response of the wavelet band as a function of an eigenvalue of
/// the normalized Laplacian.
pub fn frequency_response(band: Band, lambda: f64) -> f64 {
    let t = 1.0 - lambda / 2.0;
    match band {
        Band::Low => t * t,
        Band::Mid => t - t * t,
        Band::High => lambda / 2.0,
    }
}

/// Wavelet bank filters: low `T²X`, mid `(T - T²)X`, high `(I - T)X`.
pub fn wavelet_filter(x: &Array2<f64>, g: &Graph, band: Band) -> Result<Array2<f64>> {
    let op = DiffusionOperator::new(g);
    let tx = op.apply(x)?;
    Ok(match band {
        Band::High => x - &tx,
        Band::Low => op.apply(&tx)?,
        Band::Mid => {
            let ttx = op.apply(&tx)?;
            tx - ttx
        }
    })
}

/// All three wavelet bands with shared products.
pub fn wavelet_bank(x: &Array2<f64>, g: &Graph) -> Result<[Array2<f64>; 3]> {
    let op = DiffusionOperator::new(g);
    let tx = op.apply(x)?;
    let ttx = op.apply(&tx)?;
    Ok([ttx.clone(), &tx - &ttx, x - &tx])
}
