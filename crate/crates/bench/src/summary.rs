//! Per-group normalized scores: within each workload group, every metric is
//! min-max scaled across formats so 1 is the best format and 0 the worst.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use spformat::FormatId;

use crate::error::Result;
use crate::run::RunReport;

/// The six summary metrics, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub avg_sigma: f64,
    pub total_latency: f64,
    /// `|balance_ratio - 1|`
    pub balance_distance: f64,
    pub throughput: f64,
    pub bandwidth_utilization: f64,
    pub memory_latency: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 6] = [
        "avg_sigma",
        "total_latency",
        "balance_distance",
        "throughput",
        "bandwidth_utilization",
        "memory_latency",
    ];
    /// Whether a larger raw value is better, per column.
    const HIGHER_IS_BETTER: [bool; 6] = [false, false, false, true, true, false];

    pub fn to_array(self) -> [f64; 6] {
        [
            self.avg_sigma,
            self.total_latency,
            self.balance_distance,
            self.throughput,
            self.bandwidth_utilization,
            self.memory_latency,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            avg_sigma: a[0],
            total_latency: a[1],
            balance_distance: a[2],
            throughput: a[3],
            bandwidth_utilization: a[4],
            memory_latency: a[5],
        }
    }

    fn of(report: &RunReport) -> Self {
        let a = &report.aggregates;
        Self {
            avg_sigma: a.avg_sigma,
            total_latency: a.total_latency_cycles as f64,
            balance_distance: (a.balance_ratio - 1.0).abs(),
            throughput: a.throughput_bytes_per_sec,
            bandwidth_utilization: a.bandwidth_utilization,
            memory_latency: a.total_memory_cycles as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub format: FormatId,
    /// Number of reports averaged into `raw`.
    pub reports: usize,
    /// Mean raw metric over the group's reports for this format.
    pub raw: MetricSet,
    pub scores: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn row(&self, group: &str, format: FormatId) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.group == group && r.format == format)
    }

    /// Formats of `group` ordered best-first by the score in `column`.
    pub fn ranking(&self, group: &str, column: usize) -> Vec<FormatId> {
        let mut rows: Vec<&SummaryRow> = self.rows.iter().filter(|r| r.group == group).collect();
        rows.sort_by(|a, b| b.scores.to_array()[column].total_cmp(&a.scores.to_array()[column]));
        rows.into_iter().map(|r| r.format).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,format,reports");
        for name in MetricSet::NAMES {
            out.push_str(&format!(",{name}_raw,{name}_score"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.group, r.format, r.reports));
            for (raw, score) in r.raw.to_array().iter().zip(r.scores.to_array()) {
                out.push_str(&format!(
                    ",{},{}",
                    crate::report::fmt_float(*raw),
                    crate::report::fmt_float(score)
                ));
            }
            out.push('\n');
        }
        out
    }
}

/// Groups reports by workload group and format and scores each group.
///
/// Lower-is-better metrics are inverted before scaling, so every score is
/// in `[0, 1]` with 1 best. A metric on which all formats tie scores 1.
pub fn normalize_summary(reports: &[RunReport]) -> Result<SummaryTable> {
    if reports.is_empty() {
        return Err(spformat::Error::EmptyInput("no reports to summarize").into());
    }
    let mut group_order: Vec<&str> = Vec::new();
    let mut sums: BTreeMap<(usize, FormatId), ([f64; 6], usize)> = BTreeMap::new();
    for report in reports {
        let g = match group_order.iter().position(|g| *g == report.group) {
            Some(i) => i,
            None => {
                group_order.push(&report.group);
                group_order.len() - 1
            }
        };
        let entry = sums.entry((g, report.format)).or_insert(([0.0; 6], 0));
        for (acc, v) in entry.0.iter_mut().zip(MetricSet::of(report).to_array()) {
            *acc += v;
        }
        entry.1 += 1;
    }

    let mut rows = Vec::with_capacity(sums.len());
    for (g, group) in group_order.iter().enumerate() {
        let members: Vec<(FormatId, [f64; 6], usize)> = sums
            .range((g, FormatId::Dense)..=(g, FormatId::Dia))
            .map(|(&(_, f), &(sum, n))| (f, sum.map(|s| s / n as f64), n))
            .collect();
        let mut lo = [f64::INFINITY; 6];
        let mut hi = [f64::NEG_INFINITY; 6];
        for (_, raw, _) in &members {
            for col in 0..6 {
                lo[col] = lo[col].min(raw[col]);
                hi[col] = hi[col].max(raw[col]);
            }
        }
        for (format, raw, n) in &members {
            let scores: [f64; 6] = std::array::from_fn(|col| {
                if hi[col] == lo[col] {
                    1.0
                } else if MetricSet::HIGHER_IS_BETTER[col] {
                    (raw[col] - lo[col]) / (hi[col] - lo[col])
                } else {
                    (hi[col] - raw[col]) / (hi[col] - lo[col])
                }
            });
            rows.push(SummaryRow {
                group: group.to_string(),
                format: *format,
                reports: *n,
                raw: MetricSet::from_array(*raw),
                scores: MetricSet::from_array(scores),
            });
        }
    }
    Ok(SummaryTable { rows })
}
