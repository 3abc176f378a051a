use std::fmt::Write;

use super::{Cell, EncodedPartition, FormatParams};

/// Structured text dump of an encoding, one line per array, for fixture
/// diffing:
///
/// ```text
/// format=CSR p=4 grid=0,0 nnz=4 nnz_rows=4 ell_width=0 value_width=4 index_width=4
/// offsets metadata 4 01000000010000000100000001000000
/// ```
///
/// Each element is written little-endian at its configured width. Indices are
/// two's complement; values are IEEE-754 binary32 at width 4 and binary64 at
/// width 8. Other value widths emit the binary64 bytes truncated or
/// zero-extended to the width.
pub fn dump(enc: &EncodedPartition) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "format={} p={} grid={},{} nnz={} nnz_rows={} ell_width={} value_width={} index_width={}",
        enc.format,
        enc.p,
        enc.grid.0,
        enc.grid.1,
        enc.nnz,
        enc.nnz_rows,
        enc.ell_width,
        enc.params.value_width_bytes,
        enc.params.index_width_bytes
    );
    for array in &enc.arrays {
        let _ = write!(out, "{} {} {} ", array.name, array.role(), array.len());
        for cell in &array.cells {
            for byte in cell_bytes(cell, &enc.params) {
                let _ = write!(out, "{byte:02x}");
            }
        }
        out.push('\n');
    }
    out
}

fn cell_bytes(cell: &Cell, params: &FormatParams) -> Vec<u8> {
    let (raw, width): (Vec<u8>, usize) = match *cell {
        Cell::Index(v) => (v.to_le_bytes().to_vec(), params.index_width_bytes),
        Cell::Value(v) => match params.value_width_bytes {
            4 => ((v as f32).to_le_bytes().to_vec(), 4),
            w => (v.to_le_bytes().to_vec(), w),
        },
    };
    let fill = match *cell {
        Cell::Index(v) if v < 0 => 0xff,
        _ => 0x00,
    };
    (0..width).map(|i| raw.get(i).copied().unwrap_or(fill)).collect()
}
