//! Degree one-hot features for corpora without node labels.

use super::Dataset;
use crate::error::{CdmError, Result};
use crate::matrix::Matrix;

/// Largest node degree across the whole corpus; the default one-hot cap.
pub fn corpus_max_degree(dataset: &Dataset) -> usize {
    dataset
        .graphs
        .iter()
        .flat_map(|g| (0..g.n()).map(move |i| g.degree(i)))
        .max()
        .unwrap_or(0)
}

/// Give every node a one-hot of `min(degree, max_degree)`, width
/// `max_degree + 1`. The dataset must not already carry features.
pub fn synthesize_degree_features(dataset: &Dataset, max_degree: usize) -> Result<Dataset> {
    if dataset.feature_dim != 0 {
        return Err(CdmError::Contract(format!(
            "dataset {} already has {}-dimensional features",
            dataset.name, dataset.feature_dim
        )));
    }
    let width = max_degree + 1;
    let graphs = dataset
        .graphs
        .iter()
        .map(|g| {
            let mut f = Matrix::zeros(g.n(), width);
            for i in 0..g.n() {
                f.set(i, g.degree(i).min(max_degree), 1.0);
            }
            g.with_features(f)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(dataset.name.clone(), graphs, dataset.num_classes)
}
