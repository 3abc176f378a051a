//! Sparse-format decompression model for tiled SpMV.
//!
//! A matrix is cut into `p x p` tiles, each tile is compressed in one of the
//! supported formats, and an analytical model estimates the memory and
//! compute latency of streaming it back through a decompressor and a
//! fixed-width dot-product unit.

pub mod cost;
pub mod engine;
pub mod error;
pub mod formats;
pub mod matrix;
pub mod workloads;

pub use cost::{aggregate, evaluate, Aggregates, CostConfig, PartitionMetrics};
pub use engine::{dot, spmv_dense, spmv_partitioned, spmv_partitioned_with};
pub use error::{Error, Result};
pub use formats::{decode, decode_rows, dump, encode, EncodedPartition, FormatId, FormatParams};
pub use matrix::{density_stats, partition, DensityStats, Partition, PartitionGrid, SparseMatrix, Triplet};
pub use workloads::{gen_band, gen_random, read_matrix_market, write_matrix_market, WorkloadSpec};
