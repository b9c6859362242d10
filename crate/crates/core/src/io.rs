//! Dataset directory format: `meta.json` plus one `graph_<i>.json` per graph.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{preprocess, Dataset, RawGraph, SplitRole, Task};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub task: Task,
    pub num_classes: usize,
    pub num_folds: usize,
    pub num_graphs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitField {
    /// One role per fold for the whole graph.
    PerGraph(Vec<SplitRole>),
    /// `[fold][node]` roles (transductive datasets).
    PerNode(Vec<Vec<SplitRole>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub x: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_attr: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_nodes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_graph: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitField>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InputFormat(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InputFormat(format!("{}: {e}", path.display())))
}

/// Writes `value` as compact JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

fn feature_matrix(n: usize, rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    if rows.len() != n {
        return Err(Error::InputFormat(format!("x has {} rows for {n} nodes", rows.len())));
    }
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::InputFormat("ragged feature matrix".into()));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((n, d), flat).map_err(|e| Error::InputFormat(e.to_string()))
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let meta: DatasetMeta = read_json(&dir.join("meta.json"))?;
    let mut graphs = Vec::with_capacity(meta.num_graphs);
    let mut folds: Vec<Vec<SplitRole>> = vec![Vec::new(); meta.num_folds];
    for i in 0..meta.num_graphs {
        let rec: GraphRecord = read_json(&dir.join(format!("graph_{i}.json")))?;
        let raw = RawGraph {
            num_nodes: rec.n,
            edges: rec.edges.iter().map(|e| (e[0], e[1])).collect(),
            edge_weights: rec.edge_attr.clone(),
            features: feature_matrix(rec.n, &rec.x)?,
            node_labels: rec.y_nodes.clone(),
            graph_label: rec.y_graph,
        };
        graphs.push(preprocess(&raw)?);
        if meta.num_folds == 0 {
            continue;
        }
        match (&rec.split, meta.task) {
            (Some(SplitField::PerGraph(roles)), t) if t != Task::TransductiveNodeClassification => {
                if roles.len() != meta.num_folds {
                    return Err(Error::InputFormat(format!("graph {i}: split has {} folds", roles.len())));
                }
                for (f, r) in roles.iter().enumerate() {
                    folds[f].push(*r);
                }
            }
            (Some(SplitField::PerNode(roles)), Task::TransductiveNodeClassification) => {
                if roles.len() != meta.num_folds {
                    return Err(Error::InputFormat(format!("graph {i}: split has {} folds", roles.len())));
                }
                for (f, r) in roles.iter().enumerate() {
                    folds[f].extend_from_slice(r);
                }
            }
            // A transductive file with zero nodes deserializes as PerGraph([]).
            (Some(SplitField::PerGraph(r)), Task::TransductiveNodeClassification) if r.is_empty() => {}
            _ => return Err(Error::InputFormat(format!("graph {i}: missing or malformed split"))),
        }
    }
    Dataset::new(meta.name, graphs, meta.task, meta.num_classes, folds)
}

pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = DatasetMeta {
        name: ds.name.clone(),
        task: ds.task(),
        num_classes: ds.num_classes(),
        num_folds: ds.folds().len(),
        num_graphs: ds.graphs().len(),
    };
    write_json_pretty(&dir.join("meta.json"), &meta)?;
    for (i, g) in ds.graphs().iter().enumerate() {
        let split = if ds.folds().is_empty() {
            None
        } else if ds.task() == Task::TransductiveNodeClassification {
            Some(SplitField::PerNode(ds.folds().to_vec()))
        } else {
            Some(SplitField::PerGraph(ds.folds().iter().map(|f| f[i]).collect()))
        };
        let rec = GraphRecord {
            n: g.num_nodes(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            x: g.features().rows().into_iter().map(|r| r.to_vec()).collect(),
            edge_attr: None,
            y_nodes: g.node_labels().map(<[usize]>::to_vec),
            y_graph: g.graph_label(),
            split,
        };
        write_json(&dir.join(format!("graph_{i}.json")), &rec)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use ndarray::array;

    #[test]
    fn round_trip_graph_level() {
        let g0 = Graph::new(3, vec![(0, 1), (1, 2)], array![[0.5], [1.0 / 3.0], [-2.0]])
            .unwrap()
            .with_graph_label(1);
        let g1 = Graph::new(2, vec![(0, 1)], array![[0.1], [0.2]]).unwrap().with_graph_label(0);
        let ds = Dataset::new(
            "toy",
            vec![g0, g1],
            Task::GraphClassification,
            2,
            vec![vec![SplitRole::Train, SplitRole::Test]],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        assert_eq!(read_dataset(dir.path()).unwrap(), ds);
    }

    #[test]
    fn round_trip_transductive() {
        let g = Graph::new(3, vec![(0, 1)], array![[1.0], [2.0], [3.0]])
            .unwrap()
            .with_node_labels(vec![0, 1, 1])
            .unwrap();
        let folds = vec![
            vec![SplitRole::Train, SplitRole::Val, SplitRole::Test],
            vec![SplitRole::Test, SplitRole::Train, SplitRole::Val],
        ];
        let ds = Dataset::new("t", vec![g], Task::TransductiveNodeClassification, 2, folds).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        assert_eq!(read_dataset(dir.path()).unwrap(), ds);
    }

    #[test]
    fn directed_input_is_symmetrized_on_read() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("meta.json"),
            r#"{"name":"d","task":"graph-classification","num_classes":2,"num_folds":0,"num_graphs":1}"#,
        )
        .unwrap();
        fs::write(
            dir.path().join("graph_0.json"),
            r#"{"n":3,"edges":[[0,1],[1,0],[2,2]],"x":[[1],[2],[3]],"edge_attr":[0.3,0.3,1.0],"y_graph":1}"#,
        )
        .unwrap();
        let ds = read_dataset(dir.path()).unwrap();
        assert_eq!(ds.graphs()[0].edges(), &[(0, 1)]);
    }

    #[test]
    fn bad_edge_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("meta.json"),
            r#"{"name":"d","task":"graph-classification","num_classes":2,"num_folds":0,"num_graphs":1}"#,
        )
        .unwrap();
        fs::write(dir.path().join("graph_0.json"), r#"{"n":2,"edges":[[0,5]],"x":[[1],[2]],"y_graph":0}"#)
            .unwrap();
        assert!(matches!(read_dataset(dir.path()), Err(Error::InputFormat(_))));
    }
}
