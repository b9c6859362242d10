//! Immutable attributed graphs and datasets.

use std::collections::{BTreeSet, VecDeque};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected, unweighted, attributed simple graph.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, sorted and free of
/// duplicates. Node features form an `n x d` matrix; `d == 0` means the graph
/// carries no attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    features: Array2<f64>,
    node_labels: Option<Vec<usize>>,
    graph_label: Option<usize>,
}

impl Graph {
    /// Builds a graph from edges that must already be simple. Endpoint order
    /// does not matter; self-loops and duplicates are rejected.
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != num_nodes {
            return Err(Error::Shape(format!(
                "feature matrix has {} rows for {} nodes",
                features.nrows(),
                num_nodes
            )));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InputFormat(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            if u == v {
                return Err(Error::InputFormat(format!("self-loop at node {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        let before = canon.len();
        canon.dedup();
        if canon.len() != before {
            return Err(Error::InputFormat("duplicate edges".into()));
        }
        Ok(Self::from_canonical(num_nodes, canon, features))
    }

    fn from_canonical(num_nodes: usize, edges: Vec<(usize, usize)>, features: Array2<f64>) -> Self {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Graph {
            num_nodes,
            edges,
            adjacency,
            features,
            node_labels: None,
            graph_label: None,
        }
    }

    /// Graph without attributes (`d = 0`).
    pub fn unattributed(num_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(num_nodes, edges, Array2::zeros((num_nodes, 0)))
    }

    pub fn with_node_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(Error::Shape(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_graph_label(mut self, label: usize) -> Self {
        self.graph_label = Some(label);
        self
    }

    /// Same structure and labels, new features.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.num_nodes {
            return Err(Error::Shape(format!(
                "feature matrix has {} rows for {} nodes",
                features.nrows(),
                self.num_nodes
            )));
        }
        let mut g = self.clone();
        g.features = features;
        Ok(g)
    }

    /// Same nodes, features and labels, new edge set.
    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut g = Graph::new(self.num_nodes, edges, self.features.clone())?;
        g.node_labels = self.node_labels.clone();
        g.graph_label = self.graph_label;
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(self.adjacency.iter().map(Vec::len).collect())
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn node_labels(&self) -> Option<&[usize]> {
        self.node_labels.as_deref()
    }

    pub fn graph_label(&self) -> Option<usize> {
        self.graph_label
    }

    /// Partition of the nodes into connected components, each sorted, ordered
    /// by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.num_nodes];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.num_nodes {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// All nodes within shortest-path distance `k` of `seed`, sorted.
    pub fn k_hop_ball(&self, seed: usize, k: usize) -> Result<Vec<usize>> {
        if seed >= self.num_nodes {
            return Err(Error::InvalidArgument(format!(
                "seed {seed} out of range for {} nodes",
                self.num_nodes
            )));
        }
        let active = vec![true; self.num_nodes];
        Ok(self.ball_within(seed, k, &active))
    }

    /// BFS ball restricted to nodes flagged in `active`.
    pub(crate) fn ball_within(&self, seed: usize, k: usize, active: &[bool]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_nodes];
        dist[seed] = 0;
        let mut queue = VecDeque::from([seed]);
        let mut ball = vec![seed];
        while let Some(u) = queue.pop_front() {
            if dist[u] == k {
                continue;
            }
            for &v in &self.adjacency[u] {
                if active[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    ball.push(v);
                    queue.push_back(v);
                }
            }
        }
        ball.sort_unstable();
        ball
    }

    /// Single-source hop distances; unreachable nodes are `None`.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Subgraph induced by `nodes` (sorted, distinct), relabelled `0..nodes.len()`.
    pub fn induced_edges(&self, nodes: &[usize]) -> Vec<(usize, usize)> {
        let mut index = vec![usize::MAX; self.num_nodes];
        for (i, &u) in nodes.iter().enumerate() {
            index[u] = i;
        }
        let mut out = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &self.adjacency[u] {
                let j = index[v];
                if j != usize::MAX && i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Per-node degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Multiset view, sorted ascending.
    pub fn sorted(&self) -> Vec<usize> {
        let mut d = self.0.clone();
        d.sort_unstable();
        d
    }
}

/// Graph as read from an external source: possibly directed, with
/// duplicates, self-loops and edge attributes.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub edge_weights: Option<Vec<f64>>,
    pub features: Array2<f64>,
    pub node_labels: Option<Vec<usize>>,
    pub graph_label: Option<usize>,
}

impl RawGraph {
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>, features: Array2<f64>) -> Self {
        RawGraph {
            num_nodes,
            edges,
            edge_weights: None,
            features,
            node_labels: None,
            graph_label: None,
        }
    }
}

/// Symmetrizes the adjacency, drops self-loops and edge attributes.
pub fn preprocess(raw: &RawGraph) -> Result<Graph> {
    let mut set = BTreeSet::new();
    for &(u, v) in &raw.edges {
        if u >= raw.num_nodes || v >= raw.num_nodes {
            return Err(Error::InputFormat(format!(
                "edge ({u},{v}) out of range for {} nodes",
                raw.num_nodes
            )));
        }
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    let mut g = Graph::new(raw.num_nodes, set.into_iter().collect(), raw.features.clone())?;
    if let Some(l) = &raw.node_labels {
        g = g.with_node_labels(l.clone())?;
    }
    if let Some(l) = raw.graph_label {
        g = g.with_graph_label(l);
    }
    Ok(g)
}

impl From<&Graph> for RawGraph {
    fn from(g: &Graph) -> Self {
        RawGraph {
            num_nodes: g.num_nodes,
            edges: g.edges.clone(),
            edge_weights: None,
            features: g.features.clone(),
            node_labels: g.node_labels.clone(),
            graph_label: g.graph_label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    GraphClassification,
    InductiveNodeClassification,
    TransductiveNodeClassification,
}

impl Task {
    pub fn is_graph_level(self) -> bool {
        matches!(self, Task::GraphClassification)
    }

    pub fn is_inductive(self) -> bool {
        !matches!(self, Task::TransductiveNodeClassification)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRole {
    Train,
    Val,
    Test,
}

/// Ordered collection of graphs sharing a prediction task.
///
/// `folds[f][e]` is the role of entity `e` in fold `f`. Entities are graphs
/// for graph classification and inductive node classification (all nodes of
/// a graph share its role) and nodes of the single graph for transductive
/// datasets. An empty fold list means the dataset has no predefined splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    graphs: Vec<Graph>,
    task: Task,
    num_classes: usize,
    folds: Vec<Vec<SplitRole>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<Graph>,
        task: Task,
        num_classes: usize,
        folds: Vec<Vec<SplitRole>>,
    ) -> Result<Self> {
        let ds = Dataset {
            name: name.into(),
            graphs,
            task,
            num_classes,
            folds,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        if self.num_classes == 0 {
            return Err(Error::InputFormat("num_classes must be positive".into()));
        }
        if self.task == Task::TransductiveNodeClassification && self.graphs.len() != 1 {
            return Err(Error::InputFormat(format!(
                "transductive dataset must hold exactly one graph, found {}",
                self.graphs.len()
            )));
        }
        for (i, g) in self.graphs.iter().enumerate() {
            if self.task.is_graph_level() {
                match g.graph_label() {
                    Some(l) if l < self.num_classes => {}
                    Some(l) => {
                        return Err(Error::InputFormat(format!(
                            "graph {i}: label {l} outside [0, {})",
                            self.num_classes
                        )))
                    }
                    None => return Err(Error::InputFormat(format!("graph {i}: missing graph label"))),
                }
            } else {
                let labels = g
                    .node_labels()
                    .ok_or_else(|| Error::InputFormat(format!("graph {i}: missing node labels")))?;
                if let Some(&l) = labels.iter().find(|&&l| l >= self.num_classes) {
                    return Err(Error::InputFormat(format!(
                        "graph {i}: node label {l} outside [0, {})",
                        self.num_classes
                    )));
                }
            }
        }
        let entities = self.num_entities();
        for (f, fold) in self.folds.iter().enumerate() {
            if fold.len() != entities {
                return Err(Error::InputFormat(format!(
                    "fold {f} assigns {} entities, expected {entities}",
                    fold.len()
                )));
            }
        }
        Ok(())
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn folds(&self) -> &[Vec<SplitRole>] {
        &self.folds
    }

    pub fn has_predefined_splits(&self) -> bool {
        !self.folds.is_empty()
    }

    /// Number of split entities (graphs, or nodes for transductive tasks).
    pub fn num_entities(&self) -> usize {
        match self.task {
            Task::TransductiveNodeClassification => self.graphs.first().map_or(0, Graph::num_nodes),
            _ => self.graphs.len(),
        }
    }

    /// Label of each split entity; for inductive node tasks this is `None`
    /// because a graph has many labels.
    pub fn entity_labels(&self) -> Option<Vec<usize>> {
        match self.task {
            Task::GraphClassification => Some(self.graphs.iter().filter_map(Graph::graph_label).collect()),
            Task::TransductiveNodeClassification => self.graphs[0].node_labels().map(<[usize]>::to_vec),
            Task::InductiveNodeClassification => None,
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(Graph::num_nodes).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.graphs.iter().map(|g| g.degrees().max()).max().unwrap_or(0)
    }

    /// Same metadata, new graphs (one per original, same order).
    pub fn with_graphs(&self, graphs: Vec<Graph>) -> Result<Self> {
        if graphs.len() != self.graphs.len() {
            return Err(Error::Shape(format!(
                "{} graphs replace {}",
                graphs.len(),
                self.graphs.len()
            )));
        }
        Dataset::new(self.name.clone(), graphs, self.task, self.num_classes, self.folds.clone())
    }

    pub fn with_folds(&self, folds: Vec<Vec<SplitRole>>) -> Result<Self> {
        Dataset::new(self.name.clone(), self.graphs.clone(), self.task, self.num_classes, folds)
    }
}
