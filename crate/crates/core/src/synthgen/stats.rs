//! Classical graph statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph};

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-10;
pub const PAGERANK_MAX_ITER: usize = 1000;

/// PageRank by power iteration; dangling mass is spread uniformly.
/// Iterates until the L1 change drops below `tol` or `max_iter` is hit.
pub fn pagerank(g: &Graph, damping: f64, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidArgument(format!("damping {damping} outside (0, 1)")));
    }
    let n = g.num_nodes();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&u| g.degree(u) == 0).map(|u| x[u]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for u in 0..n {
            let inflow: f64 = g.neighbors(u).iter().map(|&v| x[v] / g.degree(v) as f64).sum();
            next[u] = base + damping * inflow;
        }
        let total: f64 = next.iter().sum();
        let mut delta = 0.0;
        for u in 0..n {
            next[u] /= total;
            delta += (next[u] - x[u]).abs();
        }
        std::mem::swap(&mut x, &mut next);
        if delta < tol {
            break;
        }
    }
    Ok(x)
}

/// Triangles through each node.
fn node_triangles(g: &Graph) -> Vec<usize> {
    let n = g.num_nodes();
    let mut tri = vec![0; n];
    for &(u, v) in g.edges() {
        // sorted adjacency intersection
        let (a, b) = (g.neighbors(u), g.neighbors(v));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    tri[u] += 1;
                    tri[v] += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    // each triangle at u was seen from both of its edges at u
    tri.iter().map(|t| t / 2).collect()
}

pub fn triangle_count(g: &Graph) -> usize {
    node_triangles(g).iter().sum::<usize>() / 3
}

/// Local clustering coefficient; 0 for nodes of degree < 2.
pub fn clustering_coefficient(g: &Graph) -> Vec<f64> {
    node_triangles(g)
        .into_iter()
        .enumerate()
        .map(|(u, t)| {
            let d = g.degree(u);
            if d < 2 {
                0.0
            } else {
                2.0 * t as f64 / (d * (d - 1)) as f64
            }
        })
        .collect()
}

/// Mean shortest-path length over ordered node pairs of a connected graph.
pub fn avg_path_length(g: &Graph) -> Result<f64> {
    let n = g.num_nodes();
    if n < 2 {
        return Ok(0.0);
    }
    let mut total = 0usize;
    for s in 0..n {
        for d in g.bfs_distances(s) {
            total += d.ok_or_else(|| Error::InvalidArgument("average path length of a disconnected graph".into()))?;
        }
    }
    Ok(total as f64 / (n * (n - 1)) as f64)
}

/// Longest shortest path between any connected pair.
pub fn diameter(g: &Graph) -> usize {
    (0..g.num_nodes())
        .map(|s| g.bfs_distances(s).into_iter().flatten().max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub num_nodes: f64,
    pub num_edges: f64,
    pub density: f64,
    pub diameter: f64,
    pub clustering: f64,
    pub triangles: f64,
}

impl GraphStats {
    pub const COLUMNS: [&'static str; 6] = ["num_nodes", "num_edges", "density", "diameter", "clustering_coeff", "triangles"];

    fn values(&self) -> [f64; 6] {
        [self.num_nodes, self.num_edges, self.density, self.diameter, self.clustering, self.triangles]
    }
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    let n = g.num_nodes();
    let m = g.num_edges();
    let density = if n < 2 { 0.0 } else { 2.0 * m as f64 / (n * (n - 1)) as f64 };
    let cc = clustering_coefficient(g);
    GraphStats {
        num_nodes: n as f64,
        num_edges: m as f64,
        density,
        diameter: diameter(g) as f64,
        clustering: if n == 0 { 0.0 } else { cc.iter().sum::<f64>() / n as f64 },
        triangles: triangle_count(g) as f64,
    }
}

/// One row per graph class (or a single `all` row for node-level tasks)
/// holding the mean of every statistic.
pub fn per_class_stats(ds: &Dataset) -> Vec<(String, usize, GraphStats)> {
    let groups: Vec<(String, Vec<&Graph>)> = if ds.task().is_graph_level() {
        (0..ds.num_classes())
            .map(|c| {
                let gs = ds.graphs().iter().filter(|g| g.graph_label() == Some(c)).collect();
                (c.to_string(), gs)
            })
            .filter(|(_, gs): &(String, Vec<&Graph>)| !gs.is_empty())
            .collect()
    } else {
        vec![("all".to_string(), ds.graphs().iter().collect())]
    };
    groups
        .into_iter()
        .map(|(name, gs)| {
            let k = gs.len() as f64;
            let mut acc = [0.0; 6];
            for g in &gs {
                for (a, v) in acc.iter_mut().zip(graph_stats(g).values()) {
                    *a += v;
                }
            }
            let [a, b, c, d, e, f] = acc.map(|v| v / k);
            let stats = GraphStats {
                num_nodes: a,
                num_edges: b,
                density: c,
                diameter: d,
                clustering: e,
                triangles: f,
            };
            (name, gs.len(), stats)
        })
        .collect()
}

pub fn per_class_csv(ds: &Dataset) -> String {
    let mut out = format!("class,num_graphs,{}\n", GraphStats::COLUMNS.join(","));
    for (name, count, s) in per_class_stats(ds) {
        let vals: Vec<String> = s.values().iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{name},{count},{}\n", vals.join(",")));
    }
    out
}
