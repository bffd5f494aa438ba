//! CDM-GNN: causal disentangled multi-granularity graph classification.
//!
//! The crate is organized around the stages of the model:
//!
//! - [`matrix`]: dense row-major `f64` matrices and a small LU solver.
//! - [`autodiff`]: a Wengert-tape reverse-mode differentiation engine and
//!   the Adam optimizer; every learnable computation runs through it.
//! - [`graph`]: graph/dataset domain types, TUDataset text-format ingestion,
//!   degree-feature synthesis, symmetric adjacency normalization with hop
//!   powers, and stratified k-fold splitting.
//! - [`mask`]: per-graph closeness masks per hop order, fusing learnable
//!   feature attention with restart-random-walk structural similarity.
//! - [`encoder`]: the two-branch (causal/bias) encoder built from masked
//!   slice layers, adaptive slice fusion, and mean pooling.
//! - [`loss`]: the three training objectives (prediction cross-entropy,
//!   uniform-KL on the bias branch, intervention cross-entropy) and their
//!   weighted total.
//! - [`trainer`]: k-fold cross-validation training, ablation runs, and
//!   run reports.
//! - [`explain`]: per-graph edge-mask explanations exported as DOT files
//!   plus CSV mask dumps.

pub mod autodiff;
pub mod encoder;
pub mod error;
pub mod explain;
pub mod graph;
pub mod loss;
pub mod mask;
pub mod matrix;
pub mod trainer;

pub use autodiff::{Adam, Tape, Tensor, TensorId};
pub use error::{CdmError, Result};
pub use graph::{Dataset, Graph, NormalizedAdjacency};
pub use matrix::Matrix;
