//! Canonical coordinate-form sparse matrix and its decomposition into
//! dense `p x p` tiles.
//!
//! Only tiles holding at least one non-zero are materialized. Dimensions that
//! are not multiples of `p` are treated as zero-padded up to the next
//! multiple, so every tile has the same shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One stored entry of a [`SparseMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// An `n_rows x n_cols` sparse matrix in coordinate form.
///
/// Entries are unique, in row-major order, and never hold an exact zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Triplet>,
}

impl SparseMatrix {
    /// Builds a matrix from unordered triplets.
    ///
    /// Duplicate coordinates are summed, and entries that end up exactly zero
    /// are dropped.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries = Vec::new();
        for (row, col, value) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(Error::OutOfBounds {
                    row,
                    col,
                    value,
                    n_rows,
                    n_cols,
                });
            }
            entries.push(Triplet { row, col, value });
        }
        // stable sort keeps duplicate summation order identical to input order
        entries.sort_by_key(|t| (t.row, t.col));

        let mut merged: Vec<Triplet> = Vec::with_capacity(entries.len());
        for t in entries {
            match merged.last_mut() {
                Some(last) if last.row == t.row && last.col == t.col => last.value += t.value,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.value != 0.0);

        Ok(Self {
            n_rows,
            n_cols,
            entries: merged,
        })
    }

    /// Square identity matrix, mostly useful in tests and examples.
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            entries: (0..n)
                .map(|i| Triplet {
                    row: i,
                    col: i,
                    value: 1.0,
                })
                .collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Triplet] {
        &self.entries
    }
}

/// A dense `p x p` tile cut from the (padded) matrix grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub grid_row: usize,
    pub grid_col: usize,
    p: usize,
    values: Vec<f64>,
}

impl Partition {
    /// Wraps a row-major `p x p` value buffer.
    pub fn new(grid_row: usize, grid_col: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != p * p {
            return Err(Error::Shape {
                expected: p * p,
                actual: values.len(),
            });
        }
        Ok(Self {
            grid_row,
            grid_col,
            p,
            values,
        })
    }

    /// Tile built from local `(row, col, value)` coordinates, zero elsewhere.
    pub fn from_local_triplets(p: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut values = vec![0.0; p * p];
        for (r, c, v) in triplets {
            if r >= p || c >= p {
                return Err(Error::OutOfBounds {
                    row: r,
                    col: c,
                    value: v,
                    n_rows: p,
                    n_cols: p,
                });
            }
            values[r * p + c] = v;
        }
        Self::new(0, 0, p, values)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.p + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.p..(row + 1) * self.p]
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row(row).iter().filter(|v| **v != 0.0).count()
    }

    /// Number of rows with at least one non-zero.
    pub fn nnz_rows(&self) -> usize {
        (0..self.p).filter(|&r| self.row_nnz(r) > 0).count()
    }
}

/// The non-zero tiles of a matrix at one partition size.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGrid {
    pub source_dims: (usize, usize),
    pub p: usize,
    pub grid_shape: (usize, usize),
    /// Non-zero tiles in row-major grid order.
    pub tiles: Vec<Partition>,
}

impl PartitionGrid {
    /// Padded row extent, `tile_rows * p`.
    pub fn padded_rows(&self) -> usize {
        self.grid_shape.0 * self.p
    }

    /// Padded column extent, `tile_cols * p`.
    pub fn padded_cols(&self) -> usize {
        self.grid_shape.1 * self.p
    }

    /// Scatters every stored tile back to global coordinates, row-major.
    pub fn to_triplets(&self) -> Vec<Triplet> {
        let p = self.p;
        let mut out = Vec::new();
        for tile in &self.tiles {
            for r in 0..p {
                for c in 0..p {
                    let value = tile.get(r, c);
                    if value != 0.0 {
                        out.push(Triplet {
                            row: tile.grid_row * p + r,
                            col: tile.grid_col * p + c,
                            value,
                        });
                    }
                }
            }
        }
        out.sort_by_key(|t| (t.row, t.col));
        out
    }
}

/// Splits `matrix` into `p x p` tiles, keeping only tiles with a non-zero.
pub fn partition(matrix: &SparseMatrix, p: usize) -> Result<PartitionGrid> {
    if p < 2 {
        return Err(Error::Config(format!("partition size must be >= 2, got {p}")));
    }
    let tile_rows = matrix.n_rows().div_ceil(p);
    let tile_cols = matrix.n_cols().div_ceil(p);

    let mut keyed: Vec<(usize, usize, f64)> = matrix
        .entries()
        .iter()
        .map(|t| {
            let tile = (t.row / p) * tile_cols + t.col / p;
            let local = (t.row % p) * p + t.col % p;
            (tile, local, t.value)
        })
        .collect();
    keyed.sort_unstable_by_key(|&(tile, local, _)| (tile, local));

    let mut tiles = Vec::new();
    let mut start = 0;
    while start < keyed.len() {
        let tile = keyed[start].0;
        let mut values = vec![0.0; p * p];
        let mut end = start;
        while end < keyed.len() && keyed[end].0 == tile {
            values[keyed[end].1] = keyed[end].2;
            end += 1;
        }
        tiles.push(Partition {
            grid_row: tile / tile_cols,
            grid_col: tile % tile_cols,
            p,
            values,
        });
        start = end;
    }

    Ok(PartitionGrid {
        source_dims: (matrix.n_rows(), matrix.n_cols()),
        p,
        grid_shape: (tile_rows, tile_cols),
        tiles,
    })
}

/// Per-grid density averages, taken over the stored (non-zero) tiles only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityStats {
    /// Mean of `nnz / p^2`.
    pub avg_partition_density: f64,
    /// Mean density of the non-zero rows of each tile, `nnz / (nnz_rows * p)`.
    pub avg_row_density: f64,
    /// Mean of `nnz_rows / p`.
    pub avg_nonzero_row_fraction: f64,
}

pub fn density_stats(grid: &PartitionGrid) -> Result<DensityStats> {
    if grid.tiles.is_empty() {
        return Err(Error::EmptyInput("partition grid has no non-zero tiles"));
    }
    let p = grid.p as f64;
    let (mut part, mut row, mut frac) = (0.0, 0.0, 0.0);
    for tile in &grid.tiles {
        let nnz = tile.nnz() as f64;
        let nnz_rows = tile.nnz_rows() as f64;
        part += nnz / (p * p);
        row += nnz / (nnz_rows * p);
        frac += nnz_rows / p;
    }
    let count = grid.tiles.len() as f64;
    Ok(DensityStats {
        avg_partition_density: part / count,
        avg_row_density: row / count,
        avg_nonzero_row_fraction: frac / count,
    })
}
