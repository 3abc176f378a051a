use std::path::PathBuf;

use spformat::FormatId;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] spformat::Error),

    #[error("workload {label}: {source}")]
    Workload {
        label: String,
        #[source]
        source: spformat::Error,
    },

    #[error(
        "SpMV verification failed for {matrix_id} {format} p={p}: row {row} expected {expected:e}, got {actual:e} (relative error {rel_error:e})"
    )]
    Verification {
        matrix_id: String,
        format: FormatId,
        p: usize,
        row: usize,
        expected: f64,
        actual: f64,
        rel_error: f64,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
