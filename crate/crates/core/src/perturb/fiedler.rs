use std::collections::HashSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{self, LaplacianKind};

const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiedlerConfig {
    pub max_iterations: usize,
    /// Stop once the largest component has fewer nodes than this.
    pub min_component: usize,
}

impl Default for FiedlerConfig {
    fn default() -> Self {
        FiedlerConfig {
            max_iterations: 200,
            min_component: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiedlerOutcome {
    pub graph: Graph,
    pub iterations: usize,
}

/// `|E(U, W)| / (|U| · |W|)` for a bipartition of one component (or of the
/// whole node set).
pub fn ratio_cut_objective(g: &Graph, u: &[usize], w: &[usize]) -> Result<f64> {
    if u.is_empty() || w.is_empty() {
        return Err(Error::InvalidArgument("both sides of a cut must be nonempty".into()));
    }
    let mut side = vec![0u8; g.num_nodes()];
    for &x in u {
        if x >= g.num_nodes() || side[x] != 0 {
            return Err(Error::InvalidArgument(format!("node {x} repeated or out of range")));
        }
        side[x] = 1;
    }
    for &x in w {
        if x >= g.num_nodes() || side[x] != 0 {
            return Err(Error::InvalidArgument(format!("node {x} repeated, shared or out of range")));
        }
        side[x] = 2;
    }
    let mut union: Vec<usize> = u.iter().chain(w).copied().collect();
    union.sort_unstable();
    let covers = union.len() == g.num_nodes() || g.connected_components().iter().any(|c| *c == union);
    if !covers {
        return Err(Error::InvalidArgument("U ∪ W is neither V nor a connected component".into()));
    }
    let cut = g
        .edges()
        .iter()
        .filter(|&&(a, b)| side[a] != 0 && side[b] != 0 && side[a] != side[b])
        .count();
    Ok(cut as f64 / (u.len() * w.len()) as f64)
}

/// Splits `nodes` (sorted) by the sign of the Fiedler vector of their induced
/// combinatorial Laplacian. Near-zero entries go to the positive side; a
/// one-signed vector falls back to a median split.
pub fn fiedler_bisect(g: &Graph, nodes: &[usize], dense_limit: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument("cannot bisect fewer than two nodes".into()));
    }
    let sub = Graph::new(nodes.len(), g.induced_edges(nodes), Array2::zeros((nodes.len(), 0)))?;
    let dec = spectral::eigendecompose(&spectral::laplacian(&sub), LaplacianKind::Combinatorial, dense_limit)?;
    let phi = dec.eigenvectors.column(1);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, &v) in phi.iter().enumerate() {
        if v > 0.0 || v.abs() <= SIGN_TOL {
            pos.push(nodes[i]);
        } else {
            neg.push(nodes[i]);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
        let half = nodes.len() / 2;
        pos = order[..half].iter().map(|&i| nodes[i]).collect();
        neg = order[half..].iter().map(|&i| nodes[i]).collect();
        pos.sort_unstable();
        neg.sort_unstable();
    }
    Ok((pos, neg))
}

/// Repeated binary Fiedler fragmentation of the largest component.
pub fn fiedler_frag(g: &Graph, cfg: &FiedlerConfig, dense_limit: usize) -> Result<FiedlerOutcome> {
    let mut current = g.clone();
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let comps = current.connected_components();
        // first maximal component in smallest-node order
        let largest = comps
            .iter()
            .fold(None::<&Vec<usize>>, |best, c| match best {
                Some(b) if b.len() >= c.len() => Some(b),
                _ => Some(c),
            });
        let Some(largest) = largest else { break };
        if largest.len() < cfg.min_component || largest.len() < 2 {
            break;
        }
        let (pos, _) = fiedler_bisect(&current, largest, dense_limit)?;
        let pos: HashSet<usize> = pos.into_iter().collect();
        let in_comp: HashSet<usize> = largest.iter().copied().collect();
        let kept: Vec<(usize, usize)> = current
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| !(in_comp.contains(&a) && pos.contains(&a) != pos.contains(&b)))
            .collect();
        current = current.with_edges(kept)?;
        iterations += 1;
    }
    Ok(FiedlerOutcome {
        graph: current,
        iterations,
    })
}
