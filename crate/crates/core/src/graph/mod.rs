//! Graph domain types, dataset ingestion, adjacency normalization, and
//! cross-validation splitting.

mod features;
mod kfold;
mod tudataset;

pub use features::{corpus_max_degree, synthesize_degree_features};
pub use kfold::stratified_kfold;
pub use tudataset::{parse_tudataset, parse_tudataset_report, IngestReport};

use crate::error::{CdmError, Result};
use crate::matrix::Matrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Tolerance below which an entry of a normalized-adjacency power counts as
/// structurally zero.
pub const SUPPORT_TOL: f64 = 1e-12;

/// One labeled graph: symmetric binary adjacency with zero diagonal, node
/// feature matrix, and a class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Matrix,
    features: Matrix,
    label: usize,
    /// Raw node labels from the source files, kept for explanation output.
    node_labels: Option<Vec<usize>>,
}

impl Graph {
    pub fn new(
        adjacency: Matrix,
        features: Matrix,
        label: usize,
        node_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(CdmError::shape("adjacency", adjacency.shape(), (n, n)));
        }
        for i in 0..n {
            for j in 0..n {
                let v = adjacency.get(i, j);
                if v != 0.0 && v != 1.0 {
                    return Err(CdmError::Contract(format!(
                        "adjacency entry ({i},{j}) = {v}, expected 0 or 1"
                    )));
                }
                if v != adjacency.get(j, i) {
                    return Err(CdmError::Contract(format!(
                        "adjacency not symmetric at ({i},{j})"
                    )));
                }
            }
            if adjacency.get(i, i) != 0.0 {
                return Err(CdmError::Contract(format!("self-loop at node {i}")));
            }
        }
        if features.rows() != n {
            return Err(CdmError::shape("features", features.shape(), (n, 0)));
        }
        if !features.all_finite() {
            return Err(CdmError::Contract("non-finite feature entry".into()));
        }
        if let Some(labels) = &node_labels {
            if labels.len() != n {
                return Err(CdmError::Contract(format!(
                    "{} node labels for {n} nodes",
                    labels.len()
                )));
            }
        }
        Ok(Graph {
            adjacency,
            features,
            label,
            node_labels,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn node_labels(&self) -> Option<&[usize]> {
        self.node_labels.as_deref()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.row(i).iter().filter(|&&v| v != 0.0).count()
    }

    /// Undirected edge list as `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency.get(i, j) != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub(crate) fn with_features(&self, features: Matrix) -> Result<Graph> {
        Graph::new(
            self.adjacency.clone(),
            features,
            self.label,
            self.node_labels.clone(),
        )
    }
}

/// A named collection of graphs sharing one feature space and a contiguous
/// label range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub graphs: Vec<Graph>,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub name: String,
}

impl Dataset {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, num_classes: usize) -> Result<Self> {
        let feature_dim = graphs.first().map_or(0, |g| g.features.cols());
        let ds = Dataset {
            graphs,
            num_classes,
            feature_dim,
            name: name.into(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.num_classes];
        for (idx, g) in self.graphs.iter().enumerate() {
            if g.features.cols() != self.feature_dim {
                return Err(CdmError::Contract(format!(
                    "graph {idx} has feature dim {} but dataset has {}",
                    g.features.cols(),
                    self.feature_dim
                )));
            }
            if g.label >= self.num_classes {
                return Err(CdmError::Contract(format!(
                    "graph {idx} label {} outside [0, {})",
                    g.label, self.num_classes
                )));
            }
            seen[g.label] = true;
        }
        if !self.graphs.is_empty() && !seen.iter().all(|&s| s) {
            return Err(CdmError::Contract(
                "labels do not cover a contiguous range".into(),
            ));
        }
        Ok(())
    }

    /// Number of graphs per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for g in &self.graphs {
            counts[g.label] += 1;
        }
        counts
    }
}

/// Versioned on-disk snapshot of an ingested dataset; round-trip exact.
#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    dataset: Dataset,
}

const CACHE_VERSION: u32 = 1;

pub fn save_cache(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = CacheFile {
        version: CACHE_VERSION,
        dataset: dataset.clone(),
    };
    let bytes = serde_json::to_vec(&file)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    let file: CacheFile = serde_json::from_slice(&bytes)?;
    if file.version != CACHE_VERSION {
        return Err(CdmError::Ingest(format!(
            "cache version {} unsupported (expected {CACHE_VERSION})",
            file.version
        )));
    }
    file.dataset.validate()?;
    Ok(file.dataset)
}

/// Symmetrically normalized adjacency `Ã = D^{-1/2} A D^{-1/2}` with its
/// second and third powers and their hop supports.
///
/// `supports[k]` marks node pairs connected by a walk of length at most
/// `k + 1` (entries of `Ã¹..Ã^{k+1}` above [`SUPPORT_TOL`]), which on a
/// connected component coincides with breadth-first reachability within
/// `k + 1` hops off the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    pub a_tilde: Matrix,
    pub powers: [Matrix; 3],
    pub supports: [Matrix; 3],
}

/// Degree-zero nodes get a zero row/column in `Ã` rather than being dropped,
/// preserving node indexing for masks.
pub fn normalize_adjacency(g: &Graph) -> NormalizedAdjacency {
    let n = g.n();
    let dinv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d = g.degree(i) as f64;
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let a_tilde = Matrix::from_fn(n, n, |i, j| g.adjacency().get(i, j) * dinv_sqrt[i] * dinv_sqrt[j]);
    let p2 = a_tilde.matmul(&a_tilde).expect("square");
    let p3 = p2.matmul(&a_tilde).expect("square");

    let pattern = |m: &Matrix| Matrix::from_fn(n, n, |i, j| f64::from(m.get(i, j).abs() > SUPPORT_TOL));
    let s1 = pattern(&a_tilde);
    let s2 = s1.zip(&pattern(&p2), |a, b| f64::from(a != 0.0 || b != 0.0)).expect("same shape");
    let s3 = s2.zip(&pattern(&p3), |a, b| f64::from(a != 0.0 || b != 0.0)).expect("same shape");

    NormalizedAdjacency {
        a_tilde: a_tilde.clone(),
        powers: [a_tilde, p2, p3],
        supports: [s1, s2, s3],
    }
}
