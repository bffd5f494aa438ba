//! Ingestion of the TUDataset text format.
//!
//! A dataset `NAME` in directory `dir` consists of:
//!
//! - `NAME_A.txt` — edge list, one `i, j` pair per line, 1-indexed over the
//!   whole corpus (block-diagonal adjacency);
//! - `NAME_graph_indicator.txt` — graph id (1-indexed) of each node;
//! - `NAME_graph_labels.txt` — one class label per graph;
//! - `NAME_node_labels.txt` — optional, one integer label per node.
//!
//! Graph labels are remapped to `[0, C)` by sorted value; node labels are
//! one-hot encoded into the feature matrix. Edge label files are ignored.

use super::{Dataset, Graph};
use crate::error::{CdmError, Result};
use crate::matrix::Matrix;
use std::collections::BTreeMap;
use std::path::Path;

/// Ingest statistics for diagnostics.
#[derive(Debug, Default, Clone)]
pub struct IngestReport {
    /// Unordered pairs listed in only one direction (symmetrized on ingest).
    pub asymmetric_edges: usize,
    /// Self-loop lines dropped on ingest.
    pub self_loops_dropped: usize,
    /// Duplicate edge lines beyond the first occurrence per direction.
    pub duplicate_edges: usize,
}

pub fn parse_tudataset(dir: &Path, name: &str) -> Result<Dataset> {
    let (dataset, report) = parse_tudataset_report(dir, name)?;
    if report.asymmetric_edges > 0 {
        eprintln!(
            "warning: {}: symmetrized {} one-directional edge pair(s)",
            name, report.asymmetric_edges
        );
    }
    Ok(dataset)
}

pub fn parse_tudataset_report(dir: &Path, name: &str) -> Result<(Dataset, IngestReport)> {
    let read = |suffix: &str, mandatory: bool| -> Result<Option<(String, String)>> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(Some((path.display().to_string(), text))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                if mandatory {
                    Err(CdmError::Ingest(format!(
                        "missing mandatory file {}",
                        path.display()
                    )))
                } else {
                    Ok(None)
                }
            }
            Err(e) => Err(e.into()),
        }
    };

    let (ind_path, indicator_text) = read("graph_indicator", true)?.expect("mandatory");
    let (lab_path, labels_text) = read("graph_labels", true)?.expect("mandatory");
    let (a_path, a_text) = read("A", true)?.expect("mandatory");
    let node_labels_file = read("node_labels", false)?;

    // Node -> graph assignment.
    let mut node_graph: Vec<usize> = Vec::new(); // 0-indexed graph per node
    for (lineno, line) in indicator_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let gid: usize = line.parse().map_err(|_| CdmError::Format {
            path: ind_path.clone(),
            line: lineno + 1,
            msg: format!("bad graph id {line:?}"),
        })?;
        if gid == 0 {
            return Err(CdmError::Format {
                path: ind_path.clone(),
                line: lineno + 1,
                msg: "graph ids are 1-indexed".into(),
            });
        }
        node_graph.push(gid - 1);
    }
    let num_graphs = node_graph.iter().max().map_or(0, |&g| g + 1);
    let total_nodes = node_graph.len();

    // Local node index within its graph.
    let mut graph_sizes = vec![0usize; num_graphs];
    let mut local_index = vec![0usize; total_nodes];
    for (node, &g) in node_graph.iter().enumerate() {
        local_index[node] = graph_sizes[g];
        graph_sizes[g] += 1;
    }

    // Raw graph labels, remapped to [0, C) by sorted value.
    let mut raw_labels: Vec<i64> = Vec::new();
    for (lineno, line) in labels_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: i64 = line.parse().map_err(|_| CdmError::Format {
            path: lab_path.clone(),
            line: lineno + 1,
            msg: format!("bad graph label {line:?}"),
        })?;
        raw_labels.push(v);
    }
    if raw_labels.len() != num_graphs {
        return Err(CdmError::Ingest(format!(
            "{} graph labels for {} graphs",
            raw_labels.len(),
            num_graphs
        )));
    }
    let mut label_map: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in &raw_labels {
        label_map.entry(v).or_default();
    }
    for (rank, (_, slot)) in label_map.iter_mut().enumerate() {
        *slot = rank;
    }
    let labels: Vec<usize> = raw_labels.iter().map(|v| label_map[v]).collect();
    let num_classes = label_map.len();

    // Optional node labels, one-hot by sorted-value rank.
    let node_labels: Option<Vec<usize>> = match &node_labels_file {
        Some((path, text)) => {
            let mut vals = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let v: usize = line.parse().map_err(|_| CdmError::Format {
                    path: path.clone(),
                    line: lineno + 1,
                    msg: format!("bad node label {line:?}"),
                })?;
                vals.push(v);
            }
            if vals.len() != total_nodes {
                return Err(CdmError::Ingest(format!(
                    "{} node labels for {} nodes",
                    vals.len(),
                    total_nodes
                )));
            }
            Some(vals)
        }
        None => None,
    };
    let label_alphabet: Vec<usize> = node_labels.as_ref().map_or(Vec::new(), |vals| {
        let mut sorted: Vec<usize> = vals.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted
    });
    let feature_dim = label_alphabet.len();

    // Per-graph adjacency from the global edge list.
    let mut adjacencies: Vec<Matrix> = graph_sizes.iter().map(|&n| Matrix::zeros(n, n)).collect();
    let mut report = IngestReport::default();
    let mut directed_seen: Vec<std::collections::BTreeSet<(usize, usize)>> =
        vec![Default::default(); num_graphs];
    for (lineno, line) in a_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (i, j) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                let parse = |s: &str| -> Result<usize> {
                    s.parse().map_err(|_| CdmError::Format {
                        path: a_path.clone(),
                        line: lineno + 1,
                        msg: format!("bad edge endpoint {s:?}"),
                    })
                };
                (parse(a)?, parse(b)?)
            }
            _ => {
                return Err(CdmError::Format {
                    path: a_path.clone(),
                    line: lineno + 1,
                    msg: format!("expected \"i, j\", got {line:?}"),
                })
            }
        };
        if i == 0 || j == 0 || i > total_nodes || j > total_nodes {
            return Err(CdmError::Format {
                path: a_path.clone(),
                line: lineno + 1,
                msg: format!("edge ({i}, {j}) references unknown node (corpus has {total_nodes})"),
            });
        }
        let (i, j) = (i - 1, j - 1);
        if node_graph[i] != node_graph[j] {
            return Err(CdmError::Format {
                path: a_path.clone(),
                line: lineno + 1,
                msg: format!(
                    "edge joins graphs {} and {}",
                    node_graph[i] + 1,
                    node_graph[j] + 1
                ),
            });
        }
        if i == j {
            report.self_loops_dropped += 1;
            continue;
        }
        let g = node_graph[i];
        let (li, lj) = (local_index[i], local_index[j]);
        if !directed_seen[g].insert((li, lj)) {
            report.duplicate_edges += 1;
        }
        adjacencies[g].set(li, lj, 1.0);
        adjacencies[g].set(lj, li, 1.0);
    }
    for seen in &directed_seen {
        for &(i, j) in seen.iter() {
            if !seen.contains(&(j, i)) {
                report.asymmetric_edges += 1;
            }
        }
    }

    // Assemble graphs.
    let mut per_graph_labels: Vec<Vec<usize>> = vec![Vec::new(); num_graphs];
    if let Some(vals) = &node_labels {
        for (node, &g) in node_graph.iter().enumerate() {
            per_graph_labels[g].push(vals[node]);
        }
    }
    let rank_of = |v: usize| label_alphabet.binary_search(&v).expect("from alphabet");
    let mut graphs = Vec::with_capacity(num_graphs);
    for g in 0..num_graphs {
        let n = graph_sizes[g];
        let features = if feature_dim == 0 {
            Matrix::zeros(n, 0)
        } else {
            let mut f = Matrix::zeros(n, feature_dim);
            for (local, &v) in per_graph_labels[g].iter().enumerate() {
                f.set(local, rank_of(v), 1.0);
            }
            f
        };
        let node_label_vec = if per_graph_labels[g].is_empty() {
            None
        } else {
            Some(per_graph_labels[g].clone())
        };
        graphs.push(Graph::new(
            std::mem::replace(&mut adjacencies[g], Matrix::zeros(0, 0)),
            features,
            labels[g],
            node_label_vec,
        )?);
    }

    let dataset = Dataset::new(name, graphs, num_classes)?;
    Ok((dataset, report))
}
