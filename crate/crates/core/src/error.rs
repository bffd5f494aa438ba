//! Crate-wide error type.

use thiserror::Error;

/// Errors across ingestion, numerics, training, and export.
#[derive(Debug, Error)]
pub enum CdmError {
    #[error("shape mismatch in {op}: {lhs} vs {rhs}")]
    Shape {
        op: &'static str,
        lhs: String,
        rhs: String,
    },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("ingest error: {0}")]
    Ingest(String),
    #[error("format error at {path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("no convergence within {max_iters} iterations (residual {residual:e})")]
    Convergence { max_iters: usize, residual: f64 },
    #[error("non-finite loss at epoch {epoch} (graph {graph})")]
    NanLoss { epoch: usize, graph: usize },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CdmError>;

impl CdmError {
    /// Build a shape error from two `(rows, cols)` pairs.
    pub fn shape(op: &'static str, lhs: (usize, usize), rhs: (usize, usize)) -> Self {
        CdmError::Shape {
            op,
            lhs: format!("{}x{}", lhs.0, lhs.1),
            rhs: format!("{}x{}", rhs.0, rhs.1),
        }
    }
}
