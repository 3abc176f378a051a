//! Sweep execution: one report per (workload, format, partition size).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spformat::cost::{aggregate, evaluate, Aggregates, CostConfig, PartitionMetrics};
use spformat::{
    encode, partition, spmv_dense, spmv_partitioned_with, EncodedPartition, FormatId, FormatParams, Partition,
    PartitionGrid, SparseMatrix, WorkloadSpec,
};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};

/// Relative tolerance for the SpMV check.
pub const SPMV_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub matrix_id: String,
    pub group: String,
    pub format: FormatId,
    pub p: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub tiles: usize,
    /// The workload as configured (seed or file path included).
    pub provenance: WorkloadSpec,
    pub cost: CostConfig,
    pub params: FormatParams,
    #[serde(flatten)]
    pub aggregates: Aggregates,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_partition: Vec<PartitionMetrics>,
}

/// Runs the sweep with the standard encoder.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RunReport>> {
    run_experiment_with(config, threads, encode)
}

/// Runs the sweep with a caller-supplied encoder, used for both the cost
/// model and the SpMV check. `threads = None` uses the global rayon pool.
///
/// Reports are ordered by workload, then format, then partition size, for
/// any thread count.
pub fn run_experiment_with<F>(config: &ExperimentConfig, threads: Option<usize>, encoder: F) -> Result<Vec<RunReport>>
where
    F: Fn(&Partition, FormatId, &FormatParams) -> spformat::Result<EncodedPartition> + Sync,
{
    config.validate()?;
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| sweep(config, &encoder)),
        None => sweep(config, &encoder),
    }
}

struct Loaded {
    workload: WorkloadSpec,
    label: String,
    matrix: SparseMatrix,
    grids: Vec<PartitionGrid>,
}

fn sweep<F>(config: &ExperimentConfig, encoder: &F) -> Result<Vec<RunReport>>
where
    F: Fn(&Partition, FormatId, &FormatParams) -> spformat::Result<EncodedPartition> + Sync,
{
    let loaded: Vec<Loaded> = config
        .workloads
        .par_iter()
        .map(|workload| {
            let label = workload.label();
            let wrap = |source| BenchError::Workload {
                label: label.clone(),
                source,
            };
            let matrix = workload.load().map_err(wrap)?;
            let grids = config
                .partition_sizes
                .iter()
                .map(|&p| partition(&matrix, p).map_err(wrap))
                .collect::<Result<_>>()?;
            Ok(Loaded {
                workload: workload.clone(),
                label,
                matrix,
                grids,
            })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let jobs: Vec<(&Loaded, FormatId, usize)> = loaded
        .iter()
        .flat_map(|w| {
            config
                .formats
                .iter()
                .flat_map(move |&f| (0..config.partition_sizes.len()).map(move |i| (w, f, i)))
        })
        .collect();

    // collect every outcome first so the reported error is the earliest in
    // sweep order, not the first one a thread happened to hit
    jobs.par_iter()
        .map(|&(w, format, i)| run_one(config, w, format, &w.grids[i], encoder))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn run_one<F>(
    config: &ExperimentConfig,
    w: &Loaded,
    format: FormatId,
    grid: &PartitionGrid,
    encoder: &F,
) -> Result<RunReport>
where
    F: Fn(&Partition, FormatId, &FormatParams) -> spformat::Result<EncodedPartition> + Sync,
{
    let wrap = |source| BenchError::Workload {
        label: w.label.clone(),
        source,
    };
    let params = &config.params;
    let per_partition: Vec<PartitionMetrics> = grid
        .tiles
        .par_iter()
        .map(|tile| Ok(evaluate(&encoder(tile, format, params)?, &config.cost)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<spformat::Result<_>>()
        .map_err(wrap)?;
    let aggregates = aggregate(&per_partition, &config.cost).map_err(wrap)?;

    if config.verify_spmv {
        verify(w, format, grid, params, encoder)?;
    }

    Ok(RunReport {
        matrix_id: w.label.clone(),
        group: w.workload.group().to_string(),
        format,
        p: grid.p,
        n_rows: w.matrix.n_rows(),
        n_cols: w.matrix.n_cols(),
        nnz: w.matrix.nnz(),
        tiles: grid.tiles.len(),
        provenance: w.workload.clone(),
        cost: config.cost,
        params: *params,
        aggregates,
        per_partition,
    })
}

/// Deterministic dense operand with no zeros and no sign changes.
pub fn probe_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + (i % 17) as f64 / 16.0).collect()
}

fn verify<F>(w: &Loaded, format: FormatId, grid: &PartitionGrid, params: &FormatParams, encoder: &F) -> Result<()>
where
    F: Fn(&Partition, FormatId, &FormatParams) -> spformat::Result<EncodedPartition> + Sync,
{
    let wrap = |source| BenchError::Workload {
        label: w.label.clone(),
        source,
    };
    let x = probe_vector(w.matrix.n_cols());
    let expected = spmv_dense(&w.matrix, &x).map_err(wrap)?;
    let actual = spmv_partitioned_with(grid, &x, |tile| encoder(tile, format, params)).map_err(wrap)?;
    if let Some((row, rel_error)) = worst_element(&w.matrix, &x, &expected, &actual) {
        if rel_error > SPMV_TOLERANCE {
            return Err(BenchError::Verification {
                matrix_id: w.label.clone(),
                format,
                p: grid.p,
                row,
                expected: expected[row],
                actual: actual[row],
                rel_error,
            });
        }
    }
    Ok(())
}

/// Row with the largest relative error and that error. The error is scaled
/// by `sum_j |a_ij * x_j|`, which equals `|y_i|` whenever the row has no
/// cancellation.
pub fn worst_element(matrix: &SparseMatrix, x: &[f64], expected: &[f64], actual: &[f64]) -> Option<(usize, f64)> {
    let mut magnitude = vec![0.0; matrix.n_rows()];
    for t in matrix.entries() {
        magnitude[t.row] += (t.value * x[t.col]).abs();
    }
    let mut worst: Option<(usize, f64)> = None;
    for (i, (&e, &a)) in expected.iter().zip(actual).enumerate() {
        let diff = (e - a).abs();
        let rel = if diff == 0.0 {
            0.0
        } else if magnitude[i] == 0.0 {
            f64::INFINITY
        } else {
            diff / magnitude[i]
        };
        if worst.is_none_or(|(_, r)| rel > r) {
            worst = Some((i, rel));
        }
    }
    worst
}
