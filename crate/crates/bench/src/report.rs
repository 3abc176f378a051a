//! Report files.
//!
//! CSV reports have one row per run with the columns in [`CSV_COLUMNS`].
//! Floats carry 15 significant digits. With per-partition output enabled a
//! second file, `<stem>.partitions.csv`, holds one row per non-zero tile
//! with the columns in [`PARTITION_COLUMNS`].
//!
//! JSON reports are an array of run objects; per-partition metrics are
//! included only when requested. JSON floats round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use spformat::WorkloadSpec;

use crate::config::OutputFormat;
use crate::error::{BenchError, Result};
use crate::run::RunReport;

pub const CSV_COLUMNS: [&str; 24] = [
    "matrix_id",
    "group",
    "format",
    "p",
    "n_rows",
    "n_cols",
    "nnz",
    "tiles",
    "seed",
    "source_path",
    "value_width_bytes",
    "index_width_bytes",
    "bcsr_block",
    "dot_cycles",
    "bus_bytes_per_cycle",
    "clock_hz",
    "total_latency_cycles",
    "total_memory_cycles",
    "total_compute_cycles",
    "balance_ratio",
    "throughput_bytes_per_sec",
    "bandwidth_utilization",
    "avg_sigma",
    "partitions_file",
];

pub const PARTITION_COLUMNS: [&str; 14] = [
    "matrix_id",
    "format",
    "p",
    "grid_row",
    "grid_col",
    "mem_cycles",
    "compute_cycles",
    "decomp_cycles",
    "sigma",
    "bytes_total",
    "bytes_useful",
    "nnz",
    "nnz_rows",
    "emitted_rows",
];

/// Formats a float rounded to 15 significant digits, printed in the
/// shortest form that reads back as that rounded value.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.14e}").parse().expect("formatted float parses");
    let magnitude = rounded.abs();
    if magnitude != 0.0 && !(1e-5..1e16).contains(&magnitude) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// Path of the per-partition companion file for a CSV report.
pub fn partitions_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.partitions.csv"))
}

/// Writes `reports` to `path`, creating parent directories.
/// Returns every file written.
pub fn emit_report(
    reports: &[RunReport],
    format: OutputFormat,
    path: &Path,
    per_partition: bool,
) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    match format {
        OutputFormat::Json => {
            let text = to_json(reports, per_partition);
            write_file(path, text.as_bytes())?;
            Ok(vec![path.to_path_buf()])
        }
        OutputFormat::Csv => {
            let companion = per_partition.then(|| partitions_path(path));
            let name = companion
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            write_file(path, &to_csv(reports, &name))?;
            let mut written = vec![path.to_path_buf()];
            if let Some(companion) = companion {
                write_file(&companion, &partitions_csv(reports))?;
                written.push(companion);
            }
            Ok(written)
        }
    }
}

pub fn to_json(reports: &[RunReport], per_partition: bool) -> String {
    let stripped;
    let reports = if per_partition {
        reports
    } else {
        stripped = reports
            .iter()
            .map(|r| RunReport {
                per_partition: Vec::new(),
                ..r.clone()
            })
            .collect::<Vec<_>>();
        &stripped
    };
    let mut text = serde_json::to_string_pretty(reports).expect("reports serialize");
    text.push('\n');
    text
}

/// CSV text for the run rows; `partitions_file` fills the column of that name.
pub fn to_csv(reports: &[RunReport], partitions_file: &str) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in reports {
        let (seed, source) = match &r.provenance {
            WorkloadSpec::Random { seed, .. } => (seed.to_string(), String::new()),
            WorkloadSpec::File { path } => (String::new(), path.clone()),
            WorkloadSpec::Band { .. } => (String::new(), String::new()),
        };
        let a = &r.aggregates;
        w.write_record([
            r.matrix_id.clone(),
            r.group.clone(),
            r.format.to_string(),
            r.p.to_string(),
            r.n_rows.to_string(),
            r.n_cols.to_string(),
            r.nnz.to_string(),
            r.tiles.to_string(),
            seed,
            source,
            r.params.value_width_bytes.to_string(),
            r.params.index_width_bytes.to_string(),
            r.params.bcsr_block.to_string(),
            r.cost.dot_latency(r.p).to_string(),
            r.cost.bus_bytes_per_cycle.to_string(),
            fmt_float(r.cost.clock_hz),
            a.total_latency_cycles.to_string(),
            a.total_memory_cycles.to_string(),
            a.total_compute_cycles.to_string(),
            fmt_float(a.balance_ratio),
            fmt_float(a.throughput_bytes_per_sec),
            fmt_float(a.bandwidth_utilization),
            fmt_float(a.avg_sigma),
            partitions_file.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn partitions_csv(reports: &[RunReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PARTITION_COLUMNS).expect("in-memory write");
    for r in reports {
        for m in &r.per_partition {
            w.write_record([
                r.matrix_id.clone(),
                r.format.to_string(),
                r.p.to_string(),
                m.grid_row.to_string(),
                m.grid_col.to_string(),
                m.mem_cycles.to_string(),
                m.compute_cycles.to_string(),
                m.decomp_cycles.to_string(),
                fmt_float(m.sigma),
                m.bytes_total.to_string(),
                m.bytes_useful.to_string(),
                m.nnz.to_string(),
                m.nnz_rows.to_string(),
                m.emitted_rows.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a JSON report file written by [`emit_report`].
pub fn read_json_reports(path: &Path) -> Result<Vec<RunReport>> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| BenchError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    out.write_all(bytes).map_err(io)?;
    out.flush().map_err(io)
}
