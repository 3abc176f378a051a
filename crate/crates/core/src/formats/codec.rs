use super::{dia_row_range, Cell, EncodedPartition, FormatId, FormatParams, NamedArray};
use crate::error::{Error, Result};
use crate::matrix::Partition;

/// Compresses one tile.
pub fn encode(tile: &Partition, format: FormatId, params: &FormatParams) -> Result<EncodedPartition> {
    params.validate_for(tile.p())?;
    let p = tile.p();
    let mut ell_width = 0;
    let arrays = match format {
        FormatId::Dense => vec![NamedArray::new(
            "values",
            tile.values().iter().map(|&v| Cell::Value(v)).collect(),
        )],
        FormatId::Csr => encode_csr(tile, false),
        FormatId::Csc => encode_csr(tile, true),
        FormatId::Bcsr => encode_bcsr(tile, params.bcsr_block),
        FormatId::Coo => encode_coo(tile),
        FormatId::Lil => encode_lil(tile),
        FormatId::Ell => {
            ell_width = (0..p)
                .map(|r| tile.row_nnz(r))
                .max()
                .unwrap_or(0)
                .max(params.ell_min_width);
            encode_ell(tile, ell_width)
        }
        FormatId::Dia => encode_dia(tile),
    };
    Ok(EncodedPartition {
        format,
        p,
        grid: (tile.grid_row, tile.grid_col),
        params: *params,
        arrays,
        nnz: tile.nnz(),
        nnz_rows: tile.nnz_rows(),
        ell_width,
    })
}

fn index(v: usize) -> Cell {
    Cell::Index(v as i64)
}

/// CSR, or CSC when `by_column` (the same walk over the transposed tile).
fn encode_csr(tile: &Partition, by_column: bool) -> Vec<NamedArray> {
    let p = tile.p();
    let at = |major: usize, minor: usize| {
        if by_column {
            tile.get(minor, major)
        } else {
            tile.get(major, minor)
        }
    };
    let mut offsets = Vec::with_capacity(p);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for major in 0..p {
        let mut count = 0;
        for minor in 0..p {
            let v = at(major, minor);
            if v != 0.0 {
                indices.push(index(minor));
                values.push(Cell::Value(v));
                count += 1;
            }
        }
        offsets.push(index(count));
    }
    vec![
        NamedArray::new("offsets", offsets),
        NamedArray::new("indices", indices),
        NamedArray::new("values", values),
    ]
}

fn encode_bcsr(tile: &Partition, b: usize) -> Vec<NamedArray> {
    let p = tile.p();
    let mut offsets = Vec::with_capacity(p / b);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for br in 0..p / b {
        let mut count = 0;
        for bc in 0..p / b {
            let block: Vec<f64> = (0..b)
                .flat_map(|r| (0..b).map(move |c| (br * b + r, bc * b + c)))
                .map(|(r, c)| tile.get(r, c))
                .collect();
            if block.iter().any(|v| *v != 0.0) {
                indices.push(index(bc * b));
                values.extend(block.into_iter().map(Cell::Value));
                count += 1;
            }
        }
        offsets.push(index(count));
    }
    vec![
        NamedArray::new("offsets", offsets),
        NamedArray::new("indices", indices),
        NamedArray::new("values", values),
    ]
}

fn encode_coo(tile: &Partition) -> Vec<NamedArray> {
    let p = tile.p();
    let mut tuples = Vec::new();
    for r in 0..p {
        for c in 0..p {
            let v = tile.get(r, c);
            if v != 0.0 {
                tuples.extend([index(r), index(c), Cell::Value(v)]);
            }
        }
    }
    vec![NamedArray::new("tuples", tuples)]
}

fn encode_lil(tile: &Partition) -> Vec<NamedArray> {
    let p = tile.p();
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for r in (0..p).filter(|&r| tile.row_nnz(r) > 0) {
        indices.push(index(r));
        values.extend(tile.row(r).iter().map(|&v| Cell::Value(v)));
    }
    // terminator record
    indices.push(index(p));
    values.extend(std::iter::repeat_n(Cell::Value(0.0), p));
    vec![NamedArray::new("indices", indices), NamedArray::new("values", values)]
}

fn encode_ell(tile: &Partition, width: usize) -> Vec<NamedArray> {
    let p = tile.p();
    let mut values = vec![Cell::Value(0.0); p * width];
    let mut indices = vec![Cell::Index(0); p * width];
    for r in 0..p {
        let nonzeros = tile.row(r).iter().enumerate().filter(|(_, v)| **v != 0.0);
        for (k, (c, &v)) in nonzeros.enumerate() {
            values[k * p + r] = Cell::Value(v);
            indices[k * p + r] = index(c);
        }
    }
    vec![NamedArray::new("values", values), NamedArray::new("indices", indices)]
}

fn encode_dia(tile: &Partition) -> Vec<NamedArray> {
    let p = tile.p() as i64;
    let mut diags = Vec::new();
    for d in -(p - 1)..p {
        let (lo, hi) = dia_row_range(tile.p(), d);
        let run: Vec<f64> = (lo..hi).map(|r| tile.get(r, (r as i64 + d) as usize)).collect();
        if run.iter().any(|v| *v != 0.0) {
            diags.push(Cell::Index(d));
            diags.extend(run.into_iter().map(Cell::Value));
        }
    }
    vec![NamedArray::new("diags", diags)]
}

/// Reconstructs the source tile.
pub fn decode(enc: &EncodedPartition) -> Result<Partition> {
    let p = enc.p;
    let mut values = vec![0.0; p * p];
    for (r, row) in decode_rows(enc)? {
        values[r * p..(r + 1) * p].copy_from_slice(&row);
    }
    Partition::new(enc.grid.0, enc.grid.1, p, values)
}

/// Dense rows in the order and number the format's decompression produces
/// them. Rows the mechanism skips are implicitly zero.
pub fn decode_rows(enc: &EncodedPartition) -> Result<Vec<(usize, Vec<f64>)>> {
    let reader = Reader { enc };
    match enc.format {
        FormatId::Dense => reader.dense(),
        FormatId::Csr => reader.csr(),
        FormatId::Csc => reader.csc(),
        FormatId::Bcsr => reader.bcsr(),
        FormatId::Coo => reader.coo(),
        FormatId::Lil => reader.lil(),
        FormatId::Ell => reader.ell(),
        FormatId::Dia => reader.dia(),
    }
}

/// Validating accessor over the arrays of one encoding.
struct Reader<'a> {
    enc: &'a EncodedPartition,
}

impl<'a> Reader<'a> {
    fn corrupt(&self, array: &'static str, reason: impl Into<String>) -> Error {
        Error::Corrupt {
            format: self.enc.format.name(),
            array,
            reason: reason.into(),
        }
    }

    fn array(&self, name: &'static str) -> Result<&'a [Cell]> {
        self.enc
            .array(name)
            .map(|a| a.cells.as_slice())
            .ok_or_else(|| self.corrupt(name, "missing"))
    }

    fn expect_len(&self, name: &'static str, cells: &[Cell], len: usize) -> Result<()> {
        if cells.len() != len {
            return Err(self.corrupt(name, format!("length {} does not match expected {len}", cells.len())));
        }
        Ok(())
    }

    fn index_at(&self, name: &'static str, cells: &[Cell], i: usize, limit: usize) -> Result<usize> {
        match cells.get(i) {
            Some(Cell::Index(v)) if *v >= 0 && (*v as usize) < limit => Ok(*v as usize),
            Some(Cell::Index(v)) => Err(self.corrupt(name, format!("index {v} at {i} outside 0..{limit}"))),
            Some(Cell::Value(_)) => Err(self.corrupt(name, format!("expected index at {i}, found value"))),
            None => Err(self.corrupt(name, format!("truncated at {i}"))),
        }
    }

    fn value_at(&self, name: &'static str, cells: &[Cell], i: usize) -> Result<f64> {
        match cells.get(i) {
            Some(Cell::Value(v)) => Ok(*v),
            Some(Cell::Index(_)) => Err(self.corrupt(name, format!("expected value at {i}, found index"))),
            None => Err(self.corrupt(name, format!("truncated at {i}"))),
        }
    }

    fn dense(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let values = self.array("values")?;
        self.expect_len("values", values, p * p)?;
        (0..p)
            .map(|r| {
                let row = (0..p)
                    .map(|c| self.value_at("values", values, r * p + c))
                    .collect::<Result<Vec<_>>>()?;
                Ok((r, row))
            })
            .collect()
    }

    /// Per-row counts, then a sequential walk over indices/values.
    fn csr(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let (offsets, indices, values) = self.compressed_arrays()?;
        let mut cursor = 0;
        let mut rows = Vec::new();
        for r in 0..p {
            let count = self.index_at("offsets", offsets, r, p + 1)?;
            if count == 0 {
                continue;
            }
            let mut row = vec![0.0; p];
            for k in cursor..cursor + count {
                let c = self.index_at("indices", indices, k, p)?;
                row[c] = self.value_at("values", values, k)?;
            }
            cursor += count;
            rows.push((r, row));
        }
        Ok(rows)
    }

    /// Column-compressed storage read back row by row: every output row scans
    /// all columns for entries whose stored row index matches.
    fn csc(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let (offsets, indices, values) = self.compressed_arrays()?;
        let mut starts = Vec::with_capacity(p + 1);
        starts.push(0);
        for c in 0..p {
            let count = self.index_at("offsets", offsets, c, p + 1)?;
            starts.push(starts[c] + count);
        }
        let mut present = vec![false; p];
        for k in 0..indices.len() {
            present[self.index_at("indices", indices, k, p)?] = true;
        }
        let mut rows = Vec::new();
        for r in (0..p).filter(|&r| present[r]) {
            let mut row = vec![0.0; p];
            for c in 0..p {
                for k in starts[c]..starts[c + 1] {
                    if self.index_at("indices", indices, k, p)? == r {
                        row[c] = self.value_at("values", values, k)?;
                    }
                }
            }
            rows.push((r, row));
        }
        Ok(rows)
    }

    /// Shared length checks for CSR and CSC.
    fn compressed_arrays(&self) -> Result<(&'a [Cell], &'a [Cell], &'a [Cell])> {
        let p = self.enc.p;
        let offsets = self.array("offsets")?;
        let indices = self.array("indices")?;
        let values = self.array("values")?;
        self.expect_len("offsets", offsets, p)?;
        let mut total = 0;
        for i in 0..p {
            total += self.index_at("offsets", offsets, i, p + 1)?;
        }
        self.expect_len("indices", indices, total)?;
        self.expect_len("values", values, total)?;
        Ok((offsets, indices, values))
    }

    fn bcsr(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let b = self.enc.params.bcsr_block;
        if b == 0 || !p.is_multiple_of(b) {
            return Err(self.corrupt("offsets", format!("block size {b} does not divide {p}")));
        }
        let block_rows = p / b;
        let offsets = self.array("offsets")?;
        let indices = self.array("indices")?;
        let values = self.array("values")?;
        self.expect_len("offsets", offsets, block_rows)?;
        let mut n_blocks = 0;
        for i in 0..block_rows {
            n_blocks += self.index_at("offsets", offsets, i, block_rows + 1)?;
        }
        self.expect_len("indices", indices, n_blocks)?;
        self.expect_len("values", values, n_blocks * b * b)?;

        let mut rows = Vec::new();
        let mut block = 0;
        for br in 0..block_rows {
            let count = self.index_at("offsets", offsets, br, block_rows + 1)?;
            if count == 0 {
                continue;
            }
            let mut dense = vec![vec![0.0; p]; b];
            for blk in block..block + count {
                let first_col = self.index_at("indices", indices, blk, p)?;
                if first_col % b != 0 {
                    return Err(self.corrupt("indices", format!("column {first_col} is not block aligned")));
                }
                // block columns land in parallel; rows of the block in order
                for (r, row) in dense.iter_mut().enumerate() {
                    for c in 0..b {
                        row[first_col + c] = self.value_at("values", values, blk * b * b + r * b + c)?;
                    }
                }
            }
            block += count;
            rows.extend(dense.into_iter().enumerate().map(|(r, row)| (br * b + r, row)));
        }
        Ok(rows)
    }

    fn coo(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let tuples = self.array("tuples")?;
        if tuples.len() % 3 != 0 {
            return Err(self.corrupt("tuples", format!("length {} is not a multiple of 3", tuples.len())));
        }
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; p];
        for t in 0..tuples.len() / 3 {
            let r = self.index_at("tuples", tuples, 3 * t, p)?;
            let c = self.index_at("tuples", tuples, 3 * t + 1, p)?;
            let v = self.value_at("tuples", tuples, 3 * t + 2)?;
            rows[r].get_or_insert_with(|| vec![0.0; p])[c] = v;
        }
        Ok(rows
            .into_iter()
            .enumerate()
            .filter_map(|(r, row)| row.map(|row| (r, row)))
            .collect())
    }

    fn lil(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let indices = self.array("indices")?;
        let values = self.array("values")?;
        if indices.is_empty() {
            return Err(self.corrupt("indices", "missing terminator record"));
        }
        self.expect_len("values", values, indices.len() * p)?;
        let mut rows = Vec::new();
        let mut previous: Option<usize> = None;
        for k in 0..indices.len() {
            let r = self.index_at("indices", indices, k, p + 1)?;
            if r == p {
                if k + 1 != indices.len() {
                    return Err(self.corrupt("indices", format!("terminator at record {k} is not last")));
                }
                return Ok(rows);
            }
            if previous.is_some_and(|prev| prev >= r) {
                return Err(self.corrupt("indices", format!("row {r} out of order at record {k}")));
            }
            previous = Some(r);
            let row = (0..p)
                .map(|c| self.value_at("values", values, k * p + c))
                .collect::<Result<Vec<_>>>()?;
            rows.push((r, row));
        }
        Err(self.corrupt("indices", "missing terminator record"))
    }

    /// Every row is rebuilt by direct assignment. A row's valid entries are
    /// the leading non-zero values of its column-major slots; the rest is
    /// padding.
    fn ell(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let width = self.enc.ell_width;
        let values = self.array("values")?;
        let indices = self.array("indices")?;
        self.expect_len("values", values, p * width)?;
        self.expect_len("indices", indices, p * width)?;
        let mut rows = Vec::with_capacity(p);
        for r in 0..p {
            let mut row = vec![0.0; p];
            for k in 0..width {
                let v = self.value_at("values", values, k * p + r)?;
                if v == 0.0 {
                    break;
                }
                row[self.index_at("indices", indices, k * p + r, p)?] = v;
            }
            rows.push((r, row));
        }
        Ok(rows)
    }

    /// Every output row traverses all stored diagonals.
    fn dia(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.enc.p;
        let diags = self.array("diags")?;
        // (diagonal number, position of its first value)
        let mut records: Vec<(i64, usize)> = Vec::new();
        let mut i = 0;
        while i < diags.len() {
            let d = match diags[i] {
                Cell::Index(d) if d.unsigned_abs() < p as u64 => d,
                Cell::Index(d) => return Err(self.corrupt("diags", format!("diagonal {d} outside tile"))),
                Cell::Value(_) => return Err(self.corrupt("diags", format!("expected header at {i}"))),
            };
            if records.last().is_some_and(|(prev, _)| *prev >= d) {
                return Err(self.corrupt("diags", format!("diagonal {d} out of order")));
            }
            let len = p - d.unsigned_abs() as usize;
            if i + 1 + len > diags.len() {
                return Err(self.corrupt("diags", format!("diagonal {d} truncated")));
            }
            records.push((d, i + 1));
            i += 1 + len;
        }

        let mut rows = Vec::new();
        for r in 0..p {
            let mut row = vec![0.0; p];
            let mut touched = false;
            for &(d, start) in &records {
                let (lo, hi) = dia_row_range(p, d);
                if (lo..hi).contains(&r) {
                    let c = (r as i64 + d) as usize;
                    row[c] = self.value_at("diags", diags, start + (r - lo))?;
                    touched = true;
                }
            }
            if touched {
                rows.push((r, row));
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tile(p: usize, triplets: &[(usize, usize, f64)]) -> Partition {
        Partition::from_local_triplets(p, triplets.iter().copied()).unwrap()
    }

    #[test]
    fn all_zero_tile_encodes_empty_payload() {
        let zero = tile(8, &[]);
        for f in FormatId::ALL {
            let enc = encode(&zero, f, &FormatParams::default()).unwrap();
            assert_eq!(enc.nnz, 0);
            assert_eq!(decode(&enc).unwrap(), zero, "{f}");
        }
    }

    #[test]
    fn lil_terminator_record() {
        let enc = encode(&tile(4, &[(2, 1, 3.0)]), FormatId::Lil, &FormatParams::default()).unwrap();
        assert_eq!(
            enc.array("indices").unwrap().cells,
            vec![Cell::Index(2), Cell::Index(4)]
        );
        assert_eq!(enc.array("values").unwrap().len(), 8);
    }

    #[test]
    fn csr_length_mismatch_is_corruption() {
        let mut enc = encode(
            &tile(4, &[(0, 0, 1.0), (3, 2, 2.0)]),
            FormatId::Csr,
            &FormatParams::default(),
        )
        .unwrap();
        enc.arrays[2].cells.pop();
        match decode(&enc).unwrap_err() {
            Error::Corrupt { array, .. } => assert_eq!(array, "values"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coo_bad_tuple_length() {
        let mut enc = encode(&tile(4, &[(1, 1, 1.0)]), FormatId::Coo, &FormatParams::default()).unwrap();
        enc.arrays[0].cells.push(Cell::Index(0));
        assert!(matches!(decode(&enc), Err(Error::Corrupt { array: "tuples", .. })));
    }

    #[test]
    fn lil_missing_terminator() {
        let mut enc = encode(&tile(4, &[(1, 1, 1.0)]), FormatId::Lil, &FormatParams::default()).unwrap();
        enc.arrays[0].cells.pop();
        enc.arrays[1].cells.truncate(4);
        assert!(matches!(decode(&enc), Err(Error::Corrupt { array: "indices", .. })));
    }

    #[test]
    fn dia_truncated_record() {
        let mut enc = encode(&tile(4, &[(0, 0, 1.0)]), FormatId::Dia, &FormatParams::default()).unwrap();
        enc.arrays[0].cells.pop();
        assert!(matches!(decode(&enc), Err(Error::Corrupt { array: "diags", .. })));
    }

    #[test]
    fn ell_width_mismatch() {
        let mut enc = encode(&tile(8, &[(0, 0, 1.0)]), FormatId::Ell, &FormatParams::default()).unwrap();
        enc.ell_width = 7;
        assert!(matches!(decode(&enc), Err(Error::Corrupt { array: "values", .. })));
    }

    #[test]
    fn bcsr_requires_divisible_block() {
        let t = tile(6, &[(0, 0, 1.0)]);
        assert!(matches!(
            encode(&t, FormatId::Bcsr, &FormatParams::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ell_column_zero_entries_survive() {
        // genuine column-0 entries share index 0 with padding slots
        let t = tile(8, &[(0, 0, 5.0), (1, 0, 1.0), (1, 7, 2.0), (6, 0, -3.0)]);
        let enc = encode(&t, FormatId::Ell, &FormatParams::default()).unwrap();
        assert_eq!(decode(&enc).unwrap(), t);
    }

    #[test]
    fn bcsr_emits_zero_rows_of_block_row() {
        let t = tile(8, &[(5, 6, 1.0)]);
        let enc = encode(&t, FormatId::Bcsr, &FormatParams::default()).unwrap();
        let rows: Vec<usize> = decode_rows(&enc).unwrap().into_iter().map(|r| r.0).collect();
        assert_eq!(rows, vec![4, 5, 6, 7]);
        assert_eq!(enc.emitted_rows(), 4);
    }

    #[test]
    fn dia_rows_touch_only_crossed_rows() {
        // lower corner diagonal -6 only crosses rows 6 and 7
        let t = tile(8, &[(7, 1, 1.0)]);
        let enc = encode(&t, FormatId::Dia, &FormatParams::default()).unwrap();
        let rows: Vec<usize> = decode_rows(&enc).unwrap().into_iter().map(|r| r.0).collect();
        assert_eq!(rows, vec![6, 7]);
        assert_eq!(enc.emitted_rows(), 2);
    }
}
