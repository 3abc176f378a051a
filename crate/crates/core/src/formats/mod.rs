//! Partition-level sparse compression formats.
//!
//! Every format encodes a dense `p x p` [`Partition`] into a small set of
//! named arrays. Each array is modelled as one independent memory stream by
//! the cost model, so the array split below is part of the format contract:
//!
//! | format | arrays |
//! |--------|--------|
//! | DENSE  | `values[p*p]` |
//! | CSR    | `offsets[p]` (per-row counts), `indices[nnz]`, `values[nnz]` |
//! | CSC    | `offsets[p]` (per-column counts), `indices[nnz]`, `values[nnz]` |
//! | BCSR   | `offsets[p/b]` (blocks per block-row), `indices[blocks]` (first column), `values[blocks*b*b]` |
//! | COO    | `tuples[3*nnz]` interleaved `(row, col, value)` |
//! | LIL    | `indices[nnz_rows+1]`, `values[(nnz_rows+1)*p]`, last record is a terminator with index `p` |
//! | ELL    | `values[p*W]`, `indices[p*W]`, column-major, `W = max(W0, longest row)` |
//! | DIA    | `diags`: per stored diagonal a header `d` then its `p-|d|` values |
//!
//! DOK is accepted as an alias of COO when parsing format names.

mod codec;
mod dump;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use codec::{decode, decode_rows, encode};
pub use dump::dump;

/// Closed set of supported formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FormatId {
    Dense,
    Csr,
    Csc,
    Bcsr,
    Coo,
    Lil,
    Ell,
    Dia,
}

impl FormatId {
    pub const ALL: [FormatId; 8] = [
        FormatId::Dense,
        FormatId::Csr,
        FormatId::Csc,
        FormatId::Bcsr,
        FormatId::Coo,
        FormatId::Lil,
        FormatId::Ell,
        FormatId::Dia,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormatId::Dense => "DENSE",
            FormatId::Csr => "CSR",
            FormatId::Csc => "CSC",
            FormatId::Bcsr => "BCSR",
            FormatId::Coo => "COO",
            FormatId::Lil => "LIL",
            FormatId::Ell => "ELL",
            FormatId::Dia => "DIA",
        }
    }
}

impl fmt::Display for FormatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormatId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DENSE" => Ok(FormatId::Dense),
            "CSR" => Ok(FormatId::Csr),
            "CSC" => Ok(FormatId::Csc),
            "BCSR" => Ok(FormatId::Bcsr),
            "COO" | "DOK" => Ok(FormatId::Coo),
            "LIL" => Ok(FormatId::Lil),
            "ELL" => Ok(FormatId::Ell),
            "DIA" => Ok(FormatId::Dia),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

impl TryFrom<String> for FormatId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FormatId> for String {
    fn from(f: FormatId) -> Self {
        f.name().to_string()
    }
}

/// Element widths and structural parameters shared by all codecs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatParams {
    pub value_width_bytes: usize,
    pub index_width_bytes: usize,
    /// BCSR block edge `b`; must divide the partition size.
    pub bcsr_block: usize,
    /// Minimum ELL width `W0`.
    pub ell_min_width: usize,
}

impl Default for FormatParams {
    fn default() -> Self {
        Self {
            value_width_bytes: 4,
            index_width_bytes: 4,
            bcsr_block: 4,
            ell_min_width: 6,
        }
    }
}

impl FormatParams {
    pub fn validate(&self) -> Result<()> {
        if self.value_width_bytes == 0 || self.index_width_bytes == 0 {
            return Err(Error::Config("element widths must be >= 1 byte".into()));
        }
        if self.bcsr_block == 0 {
            return Err(Error::Config("bcsr_block must be >= 1".into()));
        }
        if self.ell_min_width == 0 {
            return Err(Error::Config("ell_min_width must be >= 1".into()));
        }
        Ok(())
    }

    /// Checks the parameters against a concrete partition size.
    pub fn validate_for(&self, p: usize) -> Result<()> {
        self.validate()?;
        if !p.is_multiple_of(self.bcsr_block) {
            return Err(Error::Config(format!(
                "bcsr_block {} does not divide partition size {p}",
                self.bcsr_block
            )));
        }
        Ok(())
    }
}

/// One element of an encoded array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// Metadata: an offset, count, coordinate or diagonal number.
    Index(i64),
    /// Payload: a matrix value (possibly a stored zero).
    Value(f64),
}

/// Whether an array carries payload, metadata, or interleaved records of both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Payload,
    Metadata,
    Mixed,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Payload => "payload",
            Role::Metadata => "metadata",
            Role::Mixed => "mixed",
        })
    }
}

/// A named vector of an encoding; one memory stream.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: &'static str,
    pub cells: Vec<Cell>,
}

impl NamedArray {
    pub fn new(name: &'static str, cells: Vec<Cell>) -> Self {
        Self { name, cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn payload_count(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, Cell::Value(_))).count()
    }

    pub fn metadata_count(&self) -> usize {
        self.cells.len() - self.payload_count()
    }

    pub fn role(&self) -> Role {
        match (self.payload_count(), self.metadata_count()) {
            (_, 0) => Role::Payload,
            (0, _) => Role::Metadata,
            _ => Role::Mixed,
        }
    }

    pub fn bytes(&self, params: &FormatParams) -> usize {
        self.payload_count() * params.value_width_bytes + self.metadata_count() * params.index_width_bytes
    }
}

/// A partition compressed in one format.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPartition {
    pub format: FormatId,
    pub p: usize,
    /// Grid coordinates of the source tile.
    pub grid: (usize, usize),
    pub params: FormatParams,
    pub arrays: Vec<NamedArray>,
    pub nnz: usize,
    pub nnz_rows: usize,
    /// ELL row width; 0 for every other format.
    pub ell_width: usize,
}

impl EncodedPartition {
    pub fn array(&self, name: &str) -> Option<&NamedArray> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn total_bytes(&self) -> usize {
        self.arrays.iter().map(|a| a.bytes(&self.params)).sum()
    }

    pub fn payload_bytes(&self) -> usize {
        self.arrays
            .iter()
            .map(|a| a.payload_count() * self.params.value_width_bytes)
            .sum()
    }

    pub fn metadata_bytes(&self) -> usize {
        self.total_bytes() - self.payload_bytes()
    }

    /// Bytes of genuine non-zero values.
    pub fn useful_bytes(&self) -> usize {
        self.nnz * self.params.value_width_bytes
    }

    pub fn element_count(&self) -> usize {
        self.arrays.iter().map(NamedArray::len).sum()
    }

    /// Number of dense rows the format's decompression produces, read off the
    /// metadata without decoding. Matches `decode_rows(self)?.len()` for every
    /// valid encoding.
    pub fn emitted_rows(&self) -> usize {
        let p = self.p;
        match self.format {
            FormatId::Dense | FormatId::Ell => p,
            FormatId::Csr | FormatId::Csc | FormatId::Coo | FormatId::Lil => self.nnz_rows,
            FormatId::Bcsr => {
                let b = self.params.bcsr_block;
                let offsets = self.array("offsets").map(|a| a.cells.as_slice()).unwrap_or(&[]);
                offsets.iter().filter(|c| matches!(c, Cell::Index(n) if *n > 0)).count() * b
            }
            FormatId::Dia => {
                let mut touched = vec![false; p];
                for d in self.dia_offsets() {
                    let (lo, hi) = dia_row_range(p, d);
                    touched[lo..hi].iter_mut().for_each(|t| *t = true);
                }
                touched.into_iter().filter(|t| *t).count()
            }
        }
    }

    /// Diagonal numbers of the stored DIA records, in storage order.
    /// Empty for other formats.
    pub fn dia_offsets(&self) -> Vec<i64> {
        if self.format != FormatId::Dia {
            return Vec::new();
        }
        let Some(diags) = self.array("diags") else {
            return Vec::new();
        };
        let p = self.p as i64;
        let mut out = Vec::new();
        let mut i = 0;
        while i < diags.cells.len() {
            let Cell::Index(d) = diags.cells[i] else { break };
            out.push(d);
            i += 1 + (p - d.abs()).max(0) as usize;
        }
        out
    }
}

/// Rows `[lo, hi)` of a `p x p` tile crossed by diagonal `d` (col - row).
pub(crate) fn dia_row_range(p: usize, d: i64) -> (usize, usize) {
    if d >= 0 {
        (0, p.saturating_sub(d as usize))
    } else {
        ((-d) as usize, p)
    }
}

/// Maximum size of one encoded array: `records` records of at most
/// `record_len` elements each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayBound {
    pub name: &'static str,
    pub records: usize,
    pub record_len: usize,
}

impl ArrayBound {
    pub fn max_len(&self) -> usize {
        self.records * self.record_len
    }
}

/// Worst-case array lengths of an `n x n` tile, used for buffer sizing.
pub fn worst_case_lengths(n: usize, format: FormatId, params: &FormatParams) -> Vec<ArrayBound> {
    let flat = |name, len| ArrayBound {
        name,
        records: len,
        record_len: 1,
    };
    match format {
        FormatId::Dense => vec![flat("values", n * n)],
        FormatId::Csr | FormatId::Csc => vec![flat("offsets", n), flat("indices", n * n), flat("values", n * n)],
        FormatId::Bcsr => {
            let b = params.bcsr_block.max(1);
            let blocks_per_edge = n.div_ceil(b);
            vec![
                flat("offsets", blocks_per_edge),
                flat("indices", blocks_per_edge * blocks_per_edge),
                ArrayBound {
                    name: "values",
                    records: blocks_per_edge * blocks_per_edge,
                    record_len: b * b,
                },
            ]
        }
        FormatId::Coo => vec![ArrayBound {
            name: "tuples",
            records: n * n,
            record_len: 3,
        }],
        // n lists of n values each, plus the terminator record
        FormatId::Lil => vec![
            flat("indices", n + 1),
            ArrayBound {
                name: "values",
                records: n + 1,
                record_len: n,
            },
        ],
        FormatId::Ell => {
            let width = n.max(params.ell_min_width);
            vec![
                ArrayBound {
                    name: "values",
                    records: width,
                    record_len: n,
                },
                ArrayBound {
                    name: "indices",
                    records: width,
                    record_len: n,
                },
            ]
        }
        FormatId::Dia => vec![ArrayBound {
            name: "diags",
            records: 2 * n - 1,
            record_len: n + 1,
        }],
    }
}
