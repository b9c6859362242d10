//! Disjoint-union mini-batches with sparse propagation operators.

use ndarray::{Array2, ArrayView2, Axis};

use super::ConvKind;
use crate::graph::Graph;

/// Symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// GCN operator `D̃^{-1/2} (A + I) D̃^{-1/2}` or plain adjacency for GIN.
    pub fn propagation(g: &Graph, kind: ConvKind) -> Self {
        let n = g.num_nodes();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(2 * g.num_edges() + n);
        let mut values = Vec::with_capacity(indices.capacity());
        indptr.push(0);
        match kind {
            ConvKind::Gcn => {
                let inv_sqrt: Vec<f64> = (0..n).map(|u| 1.0 / ((g.degree(u) + 1) as f64).sqrt()).collect();
                for u in 0..n {
                    let nbrs = g.neighbors(u);
                    let split = nbrs.partition_point(|&v| v < u);
                    for &v in &nbrs[..split] {
                        indices.push(v);
                        values.push(inv_sqrt[u] * inv_sqrt[v]);
                    }
                    indices.push(u);
                    values.push(inv_sqrt[u] * inv_sqrt[u]);
                    for &v in &nbrs[split..] {
                        indices.push(v);
                        values.push(inv_sqrt[u] * inv_sqrt[v]);
                    }
                    indptr.push(indices.len());
                }
            }
            ConvKind::Gin => {
                for u in 0..n {
                    for &v in g.neighbors(u) {
                        indices.push(v);
                        values.push(1.0);
                    }
                    indptr.push(indices.len());
                }
            }
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }

    /// `self · h`.
    pub fn apply(&self, h: ArrayView2<f64>) -> Array2<f64> {
        assert_eq!(h.nrows(), self.n, "operator and signal disagree on node count");
        let mut out = Array2::zeros(h.raw_dim());
        for (u, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            for k in self.indptr[u]..self.indptr[u + 1] {
                row.scaled_add(self.values[k], &h.row(self.indices[k]));
            }
        }
        out
    }

    /// Block-diagonal stacking.
    pub fn block_diag(parts: &[&Csr]) -> Csr {
        let n = parts.iter().map(|p| p.n).sum();
        let nnz = parts.iter().map(|p| p.indices.len()).sum();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        let mut offset = 0;
        for p in parts {
            for u in 0..p.n {
                for k in p.indptr[u]..p.indptr[u + 1] {
                    indices.push(p.indices[k] + offset);
                    values.push(p.values[k]);
                }
                indptr.push(indices.len());
            }
            offset += p.n;
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }
}

/// Per-graph tensors prepared once per dataset.
#[derive(Debug, Clone)]
pub struct GraphTensors {
    pub x: Array2<f64>,
    pub prop: Csr,
    pub node_labels: Option<Vec<usize>>,
    pub graph_label: Option<usize>,
}

impl GraphTensors {
    pub fn new(g: &Graph, kind: ConvKind) -> Self {
        GraphTensors {
            x: g.features().to_owned(),
            prop: Csr::propagation(g, kind),
            node_labels: g.node_labels().map(<[usize]>::to_vec),
            graph_label: g.graph_label(),
        }
    }
}

/// Disjoint union of graphs, ready for one forward pass.
#[derive(Debug, Clone)]
pub struct Batch {
    pub x: Array2<f64>,
    pub prop: Csr,
    /// Node ranges of each member graph.
    pub offsets: Vec<usize>,
}

impl Batch {
    pub fn new(parts: &[&GraphTensors]) -> Self {
        let views: Vec<_> = parts.iter().map(|p| p.x.view()).collect();
        let x = if views.is_empty() {
            Array2::zeros((0, 0))
        } else {
            ndarray::concatenate(Axis(0), &views).expect("feature widths agree")
        };
        let props: Vec<&Csr> = parts.iter().map(|p| &p.prop).collect();
        let mut offsets = vec![0];
        for p in parts {
            offsets.push(offsets.last().unwrap() + p.prop.n);
        }
        Batch {
            x,
            prop: Csr::block_diag(&props),
            offsets,
        }
    }

    pub fn num_graphs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.prop.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn gcn_operator_matches_dense_formula() {
        let g = Graph::unattributed(3, vec![(0, 1), (1, 2)]).unwrap();
        let p = Csr::propagation(&g, ConvKind::Gcn);
        let dense = p.apply(Array2::<f64>::eye(3).view());
        let d = [2.0f64, 3.0, 2.0];
        for i in 0..3 {
            for j in 0..3 {
                let a = if i == j || g.has_edge(i, j) { 1.0 } else { 0.0 };
                assert!((dense[[i, j]] - a / (d[i] * d[j]).sqrt()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_node_gcn_is_identity() {
        let g = Graph::unattributed(1, vec![]).unwrap();
        let p = Csr::propagation(&g, ConvKind::Gcn);
        assert_eq!(p.apply(array![[3.5]].view()), array![[3.5]]);
    }

    #[test]
    fn block_diag_offsets_indices() {
        let g = Graph::unattributed(2, vec![(0, 1)]).unwrap();
        let t = GraphTensors::new(&g, ConvKind::Gin);
        let b = Batch::new(&[&t, &t]);
        assert_eq!(b.offsets, vec![0, 2, 4]);
        let y = b.prop.apply(array![[1.0], [2.0], [3.0], [4.0]].view());
        assert_eq!(y, array![[2.0], [1.0], [4.0], [3.0]]);
    }
}
