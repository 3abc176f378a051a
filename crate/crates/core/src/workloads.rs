//! Synthetic workloads and Matrix Market ingestion.
//!
//! Random matrices use exact-count sampling: `round(density * n^2)` distinct
//! cells drawn without replacement by `rand::seq::index::sample` driven by a
//! ChaCha8 stream seeded with `ChaCha8Rng::seed_from_u64(seed)`. Values are
//! drawn from the same stream, uniform in `(0, 1]`, after the cells. ChaCha8
//! output is specified bit-for-bit, so the result is platform independent
//! for a fixed `rand` version.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;

/// Description of one workload matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WorkloadSpec {
    Random { n: usize, density: f64, seed: u64 },
    Band { n: usize, k: usize },
    File { path: String },
}

impl WorkloadSpec {
    /// Short stable label, e.g. `random-n512-d0.01-s7`.
    pub fn label(&self) -> String {
        match self {
            WorkloadSpec::Random { n, density, seed } => format!("random-n{n}-d{density}-s{seed}"),
            WorkloadSpec::Band { n, k } => format!("band-n{n}-k{k}"),
            WorkloadSpec::File { path } => Path::new(path)
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.clone()),
        }
    }

    /// Workload family used to group summaries.
    pub fn group(&self) -> &'static str {
        match self {
            WorkloadSpec::Random { .. } => "random",
            WorkloadSpec::Band { .. } => "band",
            WorkloadSpec::File { .. } => "suitesparse",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WorkloadSpec::Random { n, density, .. } => check_random(n, density),
            WorkloadSpec::Band { n, k } => check_band(n, k),
            WorkloadSpec::File { .. } => Ok(()),
        }
    }

    pub fn load(&self) -> Result<SparseMatrix> {
        match self {
            WorkloadSpec::Random { n, density, seed } => gen_random(*n, *density, *seed),
            WorkloadSpec::Band { n, k } => gen_band(*n, *k),
            WorkloadSpec::File { path } => read_matrix_market(path),
        }
    }
}

fn check_random(n: usize, density: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("matrix dimension must be >= 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density {density} outside (0, 1]")));
    }
    Ok(())
}

fn check_band(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("matrix dimension must be >= 1".into()));
    }
    if k == 0 || k > 2 * n - 1 {
        return Err(Error::Config(format!("band width {k} outside 1..={}", 2 * n - 1)));
    }
    Ok(())
}

/// Uniformly random `n x n` matrix with exactly `round(density * n^2)`
/// non-zeros.
pub fn gen_random(n: usize, density: f64, seed: u64) -> Result<SparseMatrix> {
    check_random(n, density)?;
    let cells = n * n;
    let count = ((density * cells as f64).round() as usize).min(cells);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, cells, count).into_vec();
    let triplets: Vec<(usize, usize, f64)> = picked
        .into_iter()
        .map(|cell| (cell / n, cell % n, 1.0 - rng.random::<f64>()))
        .collect();
    SparseMatrix::from_triplets(n, n, triplets)
}

/// Band matrix of width `k`: `(i, j)` is non-zero iff `|i - j| <= k / 2`.
/// `k = 1` is a diagonal matrix.
pub fn gen_band(n: usize, k: usize) -> Result<SparseMatrix> {
    check_band(n, k)?;
    let half = k / 2;
    let mut triplets = Vec::with_capacity(n * (2 * half + 1));
    for i in 0..n {
        for j in i.saturating_sub(half)..(i + half + 1).min(n) {
            triplets.push((i, j, band_value(i, j)));
        }
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

/// 1 plus a small index-derived perturbation, so no two neighbours cancel.
fn band_value(i: usize, j: usize) -> f64 {
    1.0 + ((i * 31 + j * 17) % 97) as f64 / 1024.0
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

/// Reads a coordinate Matrix Market file.
///
/// Supports `real`, `integer` and `pattern` fields (pattern entries get 1.0)
/// with `general` or `symmetric` symmetry; symmetric files are expanded by
/// mirroring off-diagonal entries. Indices are converted to 0-based and
/// duplicate coordinates are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = BufReader::new(file).lines().enumerate();
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((i, Ok(text))) => Ok(Some((i + 1, text))),
            Some((i, Err(source))) => Err(Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(source.kind(), format!("line {}: {source}", i + 1)),
            }),
            None => Ok(None),
        }
    };

    let (_, banner) = next_line()?.ok_or_else(|| parse_err(1, "empty file".into()))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "missing %%MatrixMarket banner".into()));
    }
    if words.len() != 5 {
        return Err(parse_err(1, format!("banner has {} fields, expected 5", words.len())));
    }
    if words[1] != "matrix" {
        return Err(Error::UnsupportedFormat(words[1].clone()));
    }
    if words[2] != "coordinate" {
        return Err(Error::UnsupportedFormat(words[2].clone()));
    }
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(Error::UnsupportedFormat(other.to_string())),
    };
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::UnsupportedFormat(other.to_string())),
    };

    // size line: first non-comment, non-blank line
    let (size_line, size_text) = loop {
        match next_line()? {
            Some((_, t)) if t.trim().is_empty() || t.trim_start().starts_with('%') => continue,
            Some(found) => break found,
            None => return Err(parse_err(1, "missing size line".into())),
        }
    };
    let dims: Vec<usize> = size_text
        .split_whitespace()
        .map(|w| w.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(size_line, format!("bad size line: {e}")))?;
    let [n_rows, n_cols, declared] = dims[..] else {
        return Err(parse_err(size_line, "size line needs `rows cols nnz`".into()));
    };

    let mut triplets = Vec::with_capacity(if symmetric { 2 * declared } else { declared });
    let mut read = 0;
    while let Some((line_no, text)) = next_line()? {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let mut coord = |what: &str| -> Result<usize> {
            let word = parts
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing {what}")))?;
            let v: usize = word
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad {what} `{word}`")))?;
            if v == 0 {
                return Err(parse_err(line_no, format!("{what} must be 1-based")));
            }
            Ok(v - 1)
        };
        let row = coord("row index")?;
        let col = coord("column index")?;
        let value = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let word = parts.next().ok_or_else(|| parse_err(line_no, "missing value".into()))?;
                let parsed = if field == Field::Integer {
                    word.parse::<i64>().map(|v| v as f64).ok()
                } else {
                    word.parse::<f64>().ok()
                };
                parsed.ok_or_else(|| parse_err(line_no, format!("bad value `{word}`")))?
            }
        };
        if row >= n_rows || col >= n_cols {
            return Err(parse_err(
                line_no,
                format!("entry ({}, {}) outside {n_rows}x{n_cols}", row + 1, col + 1),
            ));
        }
        triplets.push((row, col, value));
        if symmetric && row != col {
            triplets.push((col, row, value));
        }
        read += 1;
    }
    if read != declared {
        return Err(parse_err(
            size_line,
            format!("declared {declared} entries, found {read}"),
        ));
    }
    SparseMatrix::from_triplets(n_rows, n_cols, triplets)
}

/// Writes `matrix` as a `coordinate real general` Matrix Market file.
/// Values use the shortest representation that parses back exactly.
pub fn write_matrix_market(matrix: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real general").map_err(io_err)?;
    writeln!(out, "{} {} {}", matrix.n_rows(), matrix.n_cols(), matrix.nnz()).map_err(io_err)?;
    for t in matrix.entries() {
        writeln!(out, "{} {} {:?}", t.row + 1, t.col + 1, t.value).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mtx(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn random_exact_count() {
        assert_eq!(gen_random(100, 0.25, 3).unwrap().nnz(), 2500);
        assert_eq!(gen_random(100, 0.25, 99).unwrap().nnz(), 2500);
    }

    #[test]
    fn random_rounds_to_empty() {
        assert_eq!(gen_random(10, 0.001, 1).unwrap().nnz(), 0);
    }

    #[test]
    fn random_is_deterministic() {
        let a = gen_random(64, 0.1, 42).unwrap();
        let b = gen_random(64, 0.1, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(64, 0.1, 43).unwrap());
    }

    #[test]
    fn random_values_in_unit_interval() {
        let m = gen_random(50, 0.5, 5).unwrap();
        assert!(m.entries().iter().all(|t| t.value > 0.0 && t.value <= 1.0));
    }

    #[test]
    fn random_rejects_bad_density() {
        assert!(gen_random(10, 0.0, 1).is_err());
        assert!(gen_random(10, 1.5, 1).is_err());
        assert!(gen_random(0, 0.5, 1).is_err());
    }

    #[test]
    fn band_counts() {
        assert_eq!(gen_band(8, 1).unwrap().nnz(), 8);
        assert_eq!(gen_band(8, 2).unwrap().nnz(), 22);
        assert!(gen_band(8, 0).is_err());
        assert!(gen_band(8, 16).is_err());
        assert_eq!(gen_band(8, 15).unwrap().nnz(), 64);
    }

    #[test]
    fn reads_general_file() {
        let f = mtx("%%MatrixMarket matrix coordinate real general\n% comment\n3 3 3\n1 1 2.0\n2 3 1.5\n3 2 1.5\n");
        let m = read_matrix_market(f.path()).unwrap();
        assert_eq!((m.n_rows(), m.n_cols(), m.nnz()), (3, 3, 3));
        assert_eq!(m.entries()[1].col, 2);
    }

    #[test]
    fn expands_symmetric_file() {
        let f = mtx("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 4.0\n");
        let m = read_matrix_market(f.path()).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.entries()[0].value, 4.0);
    }

    #[test]
    fn pattern_and_integer_fields() {
        let f = mtx("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n");
        let m = read_matrix_market(f.path()).unwrap();
        assert!(m.entries().iter().all(|t| t.value == 1.0));
        let f = mtx("%%MatrixMarket matrix coordinate integer general\n2 2 1\n1 1 -7\n");
        assert_eq!(read_matrix_market(f.path()).unwrap().entries()[0].value, -7.0);
    }

    #[test]
    fn unsupported_qualifiers() {
        for (banner, word) in [
            ("%%MatrixMarket matrix array real general", "array"),
            ("%%MatrixMarket matrix coordinate complex general", "complex"),
            ("%%MatrixMarket matrix coordinate real hermitian", "hermitian"),
            ("%%MatrixMarket matrix coordinate real skew-symmetric", "skew-symmetric"),
        ] {
            let f = mtx(&format!("{banner}\n1 1 1\n1 1 1.0\n"));
            match read_matrix_market(f.path()).unwrap_err() {
                Error::UnsupportedFormat(q) => assert_eq!(q, word),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let f = mtx("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 3.0\n");
        match read_matrix_market(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let f = mtx("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n");
        assert!(matches!(
            read_matrix_market(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
        let f = mtx("not a banner\n");
        assert!(matches!(
            read_matrix_market(f.path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_matrix_market("/nonexistent/file.mtx"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn write_then_read_round_trip() {
        let m = gen_random(40, 0.2, 11).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_matrix_market(&m, f.path()).unwrap();
        assert_eq!(read_matrix_market(f.path()).unwrap(), m);
    }

    #[test]
    fn spec_labels_and_serde() {
        let workload = WorkloadSpec::Random {
            n: 512,
            density: 0.01,
            seed: 7,
        };
        assert_eq!(workload.label(), "random-n512-d0.01-s7");
        assert_eq!(workload.group(), "random");
        let file = WorkloadSpec::File {
            path: "data/dwt_918.mtx".into(),
        };
        assert_eq!(file.label(), "dwt_918.mtx");
        assert!(WorkloadSpec::Band { n: 4, k: 9 }.validate().is_err());
    }
}
