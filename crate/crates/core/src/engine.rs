//! Functional model of the streaming pipeline: each non-zero tile is
//! compressed, decompressed back into dense rows by its format's mechanism,
//! and each emitted row goes through a fixed-width dot-product unit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::{decode_rows, encode, EncodedPartition, FormatId, FormatParams};
use crate::matrix::{Partition, PartitionGrid, SparseMatrix};

/// Dot product reduced with a balanced pairwise tree, like a multiplier
/// array feeding an adder tree. The reduction order depends only on the
/// length, so results are reproducible.
pub fn dot(row: &[f64], x: &[f64]) -> Result<f64> {
    if row.len() != x.len() {
        return Err(Error::Shape {
            expected: row.len(),
            actual: x.len(),
        });
    }
    let mut level: Vec<f64> = row.iter().zip(x).map(|(a, b)| a * b).collect();
    if level.is_empty() {
        return Ok(0.0);
    }
    while level.len() > 1 {
        let next = level
            .chunks(2)
            .map(|pair| if pair.len() == 2 { pair[0] + pair[1] } else { pair[0] })
            .collect();
        level = next;
    }
    Ok(level[0])
}

/// Reference `y = A x` computed straight from the triplets.
pub fn spmv_dense(matrix: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != matrix.n_cols() {
        return Err(Error::Shape {
            expected: matrix.n_cols(),
            actual: x.len(),
        });
    }
    let mut y = vec![0.0; matrix.n_rows()];
    for t in matrix.entries() {
        y[t.row] += t.value * x[t.col];
    }
    Ok(y)
}

/// SpMV through `format`'s decompression, one tile at a time.
pub fn spmv_partitioned(grid: &PartitionGrid, format: FormatId, params: &FormatParams, x: &[f64]) -> Result<Vec<f64>> {
    spmv_partitioned_with(grid, x, |tile| encode(tile, format, params))
}

/// Like [`spmv_partitioned`] with a caller-supplied tile encoder.
///
/// `x` may have the source column count or the padded column extent. Tiles
/// are processed in parallel on the current rayon pool, then accumulated in
/// grid order, so the output does not depend on the thread count.
pub fn spmv_partitioned_with<F>(grid: &PartitionGrid, x: &[f64], encoder: F) -> Result<Vec<f64>>
where
    F: Fn(&Partition) -> Result<EncodedPartition> + Sync,
{
    let p = grid.p;
    let padded = padded_operand(grid, x)?;

    let contributions: Vec<Vec<(usize, f64)>> = grid
        .tiles
        .par_iter()
        .map(|tile| {
            let enc = encoder(tile)?;
            let x_slice = &padded[tile.grid_col * p..(tile.grid_col + 1) * p];
            decode_rows(&enc)?
                .into_iter()
                .map(|(r, row)| Ok((tile.grid_row * p + r, dot(&row, x_slice)?)))
                .collect()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let mut y = vec![0.0; grid.padded_rows()];
    for tile_rows in contributions {
        for (row, value) in tile_rows {
            y[row] += value;
        }
    }
    y.truncate(grid.source_dims.0);
    Ok(y)
}

fn padded_operand(grid: &PartitionGrid, x: &[f64]) -> Result<Vec<f64>> {
    let n_cols = grid.source_dims.1;
    let padded_cols = grid.padded_cols();
    if x.len() != n_cols && x.len() != padded_cols {
        return Err(Error::Shape {
            expected: n_cols,
            actual: x.len(),
        });
    }
    let mut padded = vec![0.0; padded_cols];
    padded[..n_cols].copy_from_slice(&x[..n_cols]);
    Ok(padded)
}
