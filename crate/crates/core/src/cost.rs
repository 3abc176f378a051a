//! Analytical latency model of the decompress-and-compute pipeline.
//!
//! Memory and compute overlap per partition: each encoded array is streamed
//! in parallel over its own bus, and the compute stage decompresses the tile
//! into dense rows before pushing each through the dot-product unit. A
//! partition's latency is the larger of the two; a run's total is their sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{Cell, EncodedPartition, FormatId};

/// Tunable constants of the pipeline model. All cycle counts are per event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostConfig {
    /// Latency of one width-`p` dot product. `None` means `ceil(log2 p) + 2`,
    /// i.e. one multiply stage, the adder tree, and one output stage.
    pub dot_cycles: Option<u64>,
    /// One access to an offsets array.
    pub offset_cycles: u64,
    /// One sequentially reconstructed element.
    pub seq_cycles: u64,
    /// One scanned candidate while searching for a row's entries.
    pub scan_cycles: u64,
    /// One direct assignment into the row buffer.
    pub assign_cycles: u64,
    /// One parallel fetch of a whole row from partitioned on-chip memory.
    pub bram_cycles: u64,
    /// Bytes moved per cycle on each stream.
    pub bus_bytes_per_cycle: u64,
    pub clock_hz: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            dot_cycles: None,
            offset_cycles: 2,
            seq_cycles: 1,
            scan_cycles: 1,
            assign_cycles: 1,
            bram_cycles: 2,
            bus_bytes_per_cycle: 8,
            clock_hz: 250e6,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("dot_cycles", self.dot_cycles.unwrap_or(1)),
            ("offset_cycles", self.offset_cycles),
            ("seq_cycles", self.seq_cycles),
            ("scan_cycles", self.scan_cycles),
            ("assign_cycles", self.assign_cycles),
            ("bram_cycles", self.bram_cycles),
            ("bus_bytes_per_cycle", self.bus_bytes_per_cycle),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(Error::Config("clock_hz must be positive".into()));
        }
        Ok(())
    }

    /// Dot-product latency for partition size `p`.
    pub fn dot_latency(&self, p: usize) -> u64 {
        self.dot_cycles
            .unwrap_or_else(|| u64::from(p.max(1).next_power_of_two().trailing_zeros()) + 2)
    }
}

/// Model outputs for one encoded partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionMetrics {
    pub grid_row: usize,
    pub grid_col: usize,
    pub mem_cycles: u64,
    pub compute_cycles: u64,
    pub decomp_cycles: u64,
    pub sigma: f64,
    pub bytes_total: u64,
    pub bytes_useful: u64,
    pub nnz: usize,
    pub nnz_rows: usize,
    pub emitted_rows: usize,
}

/// Decompression latency and total compute latency of one partition.
///
/// `compute = decomp + emitted_rows * dot_latency`, where the decompression
/// term follows each format's reconstruction mechanism.
pub fn compute_latency(enc: &EncodedPartition, cfg: &CostConfig) -> (u64, u64) {
    let p = enc.p as u64;
    let nnz = enc.nnz as u64;
    let decomp = match enc.format {
        FormatId::Dense => 0,
        // one offsets access per non-empty row, then a sequential walk
        FormatId::Csr => nonzero_counts(enc)
            .map(|count| cfg.offset_cycles + count * cfg.seq_cycles)
            .sum(),
        // per non-empty block-row; blocks within it decode in parallel lanes
        FormatId::Bcsr => nonzero_counts(enc)
            .map(|blocks| cfg.offset_cycles + blocks * cfg.seq_cycles)
            .sum(),
        // every reconstructed row scans all stored entries
        FormatId::Csc => p * nnz * cfg.scan_cycles,
        // parallel row fetches plus the terminator fetch
        FormatId::Lil => (enc.nnz_rows as u64 + 1) * cfg.bram_cycles,
        // fully unrolled over the width, so independent of density and width
        FormatId::Ell => p * cfg.assign_cycles,
        FormatId::Coo => nnz * cfg.assign_cycles,
        FormatId::Dia => p * enc.dia_offsets().len() as u64 * cfg.scan_cycles,
    };
    let compute = decomp + enc.emitted_rows() as u64 * cfg.dot_latency(enc.p);
    (decomp, compute)
}

/// Non-zero entries of the `offsets` array (row counts or block counts).
fn nonzero_counts(enc: &EncodedPartition) -> impl Iterator<Item = u64> + '_ {
    enc.array("offsets")
        .into_iter()
        .flat_map(|a| a.cells.iter())
        .filter_map(|c| match c {
            Cell::Index(n) if *n > 0 => Some(*n as u64),
            _ => None,
        })
}

/// Transfer latency: arrays stream in parallel, the longest one dominates.
pub fn memory_latency(enc: &EncodedPartition, cfg: &CostConfig) -> u64 {
    enc.arrays
        .iter()
        .map(|a| (a.bytes(&enc.params) as u64).div_ceil(cfg.bus_bytes_per_cycle))
        .max()
        .unwrap_or(0)
}

/// Decompression overhead relative to computing the dense tile:
/// `(T_decomp + emitted_rows * T_dot) / (p * T_dot)`.
pub fn sigma(m: &PartitionMetrics, p: usize, cfg: &CostConfig) -> f64 {
    let t_dot = cfg.dot_latency(p) as f64;
    (m.decomp_cycles as f64 + m.emitted_rows as f64 * t_dot) / (p as f64 * t_dot)
}

/// All model outputs for one encoded partition.
pub fn evaluate(enc: &EncodedPartition, cfg: &CostConfig) -> PartitionMetrics {
    let (decomp_cycles, compute_cycles) = compute_latency(enc, cfg);
    let mut m = PartitionMetrics {
        grid_row: enc.grid.0,
        grid_col: enc.grid.1,
        mem_cycles: memory_latency(enc, cfg),
        compute_cycles,
        decomp_cycles,
        sigma: 0.0,
        bytes_total: enc.total_bytes() as u64,
        bytes_useful: enc.useful_bytes() as u64,
        nnz: enc.nnz,
        nnz_rows: enc.nnz_rows,
        emitted_rows: enc.emitted_rows(),
    };
    m.sigma = sigma(&m, enc.p, cfg);
    m
}

/// Run-level metrics folded from per-partition values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// `sum(max(mem, compute))`.
    pub total_latency_cycles: u64,
    pub total_memory_cycles: u64,
    pub total_compute_cycles: u64,
    /// Mean of `mem / compute`; 1 is perfectly balanced streaming.
    pub balance_ratio: f64,
    /// Transmitted bytes per second of total latency.
    pub throughput_bytes_per_sec: f64,
    /// Non-zero payload bytes over all transmitted bytes.
    pub bandwidth_utilization: f64,
    pub avg_sigma: f64,
}

pub fn aggregate(per_partition: &[PartitionMetrics], cfg: &CostConfig) -> Result<Aggregates> {
    if per_partition.is_empty() {
        return Err(Error::EmptyInput("no partitions to aggregate"));
    }
    let count = per_partition.len() as f64;
    let total_latency_cycles: u64 = per_partition.iter().map(|m| m.mem_cycles.max(m.compute_cycles)).sum();
    let bytes_total: u64 = per_partition.iter().map(|m| m.bytes_total).sum();
    let bytes_useful: u64 = per_partition.iter().map(|m| m.bytes_useful).sum();
    let balance_sum: f64 = per_partition
        .iter()
        .map(|m| m.mem_cycles as f64 / m.compute_cycles as f64)
        .sum();
    let sigma_sum: f64 = per_partition.iter().map(|m| m.sigma).sum();

    Ok(Aggregates {
        total_latency_cycles,
        total_memory_cycles: per_partition.iter().map(|m| m.mem_cycles).sum(),
        total_compute_cycles: per_partition.iter().map(|m| m.compute_cycles).sum(),
        balance_ratio: balance_sum / count,
        throughput_bytes_per_sec: bytes_total as f64 / (total_latency_cycles as f64 / cfg.clock_hz),
        bandwidth_utilization: bytes_useful as f64 / bytes_total as f64,
        avg_sigma: sigma_sum / count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{encode, FormatParams};
    use crate::matrix::Partition;

    fn metrics(mem: u64, compute: u64) -> PartitionMetrics {
        PartitionMetrics {
            grid_row: 0,
            grid_col: 0,
            mem_cycles: mem,
            compute_cycles: compute,
            decomp_cycles: 0,
            sigma: 1.0,
            bytes_total: 64,
            bytes_useful: 16,
            nnz: 4,
            nnz_rows: 4,
            emitted_rows: 4,
        }
    }

    #[test]
    fn default_dot_latency() {
        let cfg = CostConfig::default();
        assert_eq!(cfg.dot_latency(8), 5);
        assert_eq!(cfg.dot_latency(16), 6);
        assert_eq!(cfg.dot_latency(32), 7);
        let fixed = CostConfig {
            dot_cycles: Some(3),
            ..cfg
        };
        assert_eq!(fixed.dot_latency(32), 3);
    }

    #[test]
    fn dense_p8_latencies() {
        let tile = Partition::from_local_triplets(8, [(1, 2, 1.0)]).unwrap();
        let enc = encode(&tile, FormatId::Dense, &FormatParams::default()).unwrap();
        let cfg = CostConfig::default();
        assert_eq!(compute_latency(&enc, &cfg), (0, 40));
        assert_eq!(memory_latency(&enc, &cfg), 32);
        assert_eq!(evaluate(&enc, &cfg).sigma, 1.0);
    }

    #[test]
    fn csr_memory_latency_example() {
        // 20 non-zeros spread over 16 rows
        let triplets: Vec<_> = (0..20).map(|k| (k % 16, (k * 7 + k / 16) % 16, 1.0)).collect();
        let tile = Partition::from_local_triplets(16, triplets).unwrap();
        let enc = encode(&tile, FormatId::Csr, &FormatParams::default()).unwrap();
        assert_eq!(enc.nnz, 20);
        assert_eq!(memory_latency(&enc, &CostConfig::default()), 10);
    }

    #[test]
    fn sigma_half_rows() {
        let cfg = CostConfig::default();
        let mut m = metrics(0, 0);
        m.decomp_cycles = 0;
        m.emitted_rows = 8;
        assert_eq!(sigma(&m, 16, &cfg), 0.5);
    }

    #[test]
    fn aggregate_balanced_single() {
        let agg = aggregate(&[metrics(100, 100)], &CostConfig::default()).unwrap();
        assert_eq!(agg.total_latency_cycles, 100);
        assert_eq!(agg.balance_ratio, 1.0);
    }

    #[test]
    fn aggregate_two_partitions() {
        let cfg = CostConfig::default();
        let agg = aggregate(&[metrics(10, 20), metrics(30, 15)], &cfg).unwrap();
        assert_eq!(agg.total_latency_cycles, 50);
        assert_eq!(agg.balance_ratio, 1.25);
        assert_eq!(agg.total_memory_cycles, 40);
        assert_eq!(agg.total_compute_cycles, 35);
        assert_eq!(agg.bandwidth_utilization, 0.25);
        assert_eq!(agg.throughput_bytes_per_sec, 128.0 / (50.0 / 250e6));
    }

    #[test]
    fn aggregate_empty_errors() {
        assert!(matches!(
            aggregate(&[], &CostConfig::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn zero_constants_rejected() {
        let cfg = CostConfig {
            scan_cycles: 0,
            ..CostConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = CostConfig {
            clock_hz: 0.0,
            ..CostConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(CostConfig::default().validate().is_ok());
    }
}
