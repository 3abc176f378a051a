use spformat::cost::aggregate;
use spformat::{FormatId, WorkloadSpec};
use spformat_bench::report::{partitions_path, to_csv, CSV_COLUMNS};
use spformat_bench::summary::MetricSet;
use spformat_bench::{
    emit_report, normalize_summary, read_json_reports, run_experiment, ExperimentConfig, OutputFormat,
};

fn single(workload: WorkloadSpec) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(vec![workload]);
    c.verify_spmv = true;
    c
}

#[test]
fn one_workload_gives_24_reports() {
    let reports = run_experiment(
        &single(WorkloadSpec::Random {
            n: 100,
            density: 0.05,
            seed: 1,
        }),
        None,
    )
    .unwrap();
    assert_eq!(reports.len(), 24);
    for (i, r) in reports.iter().enumerate() {
        assert_eq!(r.format, FormatId::ALL[i / 3]);
        assert_eq!(r.p, [8, 16, 32][i % 3]);
        assert_eq!(r.nnz, 500);
    }
}

#[test]
fn dia_on_diagonal_matrix() {
    let mut c = single(WorkloadSpec::Band { n: 64, k: 1 });
    c.formats = vec![FormatId::Dia];
    c.partition_sizes = vec![32];
    let r = &run_experiment(&c, None).unwrap()[0];
    // two diagonal tiles, each one record: a 4-byte header and 32 4-byte values
    let total: u64 = r.per_partition.iter().map(|m| m.bytes_total).sum();
    let useful: u64 = r.per_partition.iter().map(|m| m.bytes_useful).sum();
    assert_eq!((useful, total), (2 * 32 * 4, 2 * (4 + 32 * 4)));
    assert_eq!(r.aggregates.bandwidth_utilization, 32.0 / 33.0);
}

#[test]
fn csv_layout_and_stable_header() {
    let dir = tempfile::tempdir().unwrap();
    let reports = run_experiment(&single(WorkloadSpec::Band { n: 96, k: 4 }), Some(2)).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("sub/b.csv");
    emit_report(&reports, OutputFormat::Csv, &a, false).unwrap();
    let written = emit_report(&reports, OutputFormat::Csv, &b, true).unwrap();
    assert_eq!(written, vec![b.clone(), partitions_path(&b)]);

    let text_a = std::fs::read_to_string(&a).unwrap();
    let text_b = std::fs::read_to_string(&b).unwrap();
    assert_eq!(text_a.lines().count(), 25);
    assert_eq!(text_a.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(text_a.lines().next(), text_b.lines().next());
}

#[test]
fn per_partition_rows_reproduce_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let reports = run_experiment(
        &single(WorkloadSpec::Random {
            n: 80,
            density: 0.2,
            seed: 9,
        }),
        None,
    )
    .unwrap();

    let json = dir.path().join("r.json");
    emit_report(&reports, OutputFormat::Json, &json, true).unwrap();
    let back = read_json_reports(&json).unwrap();
    assert_eq!(back, reports);
    for r in &back {
        assert_eq!(aggregate(&r.per_partition, &r.cost).unwrap(), r.aggregates);
    }

    // integer columns of the CSV pair recombine exactly
    let csv_path = dir.path().join("r.csv");
    emit_report(&reports, OutputFormat::Csv, &csv_path, true).unwrap();
    let mut runs = csv::Reader::from_path(&csv_path).unwrap();
    let mut parts = csv::Reader::from_path(partitions_path(&csv_path)).unwrap();
    let part_rows: Vec<csv::StringRecord> = parts.records().map(Result::unwrap).collect();
    for run in runs.records().map(Result::unwrap) {
        let total: u64 = part_rows
            .iter()
            .filter(|p| p[0] == run[0] && p[1] == run[2] && p[2] == run[3])
            .map(|p| p[5].parse::<u64>().unwrap().max(p[6].parse().unwrap()))
            .sum();
        assert_eq!(total, run[16].parse::<u64>().unwrap());
    }
}

#[test]
fn json_without_partitions_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = run_experiment(&single(WorkloadSpec::Band { n: 40, k: 2 }), None).unwrap();
    let path = dir.path().join("r.json");
    emit_report(&reports, OutputFormat::Json, &path, false).unwrap();
    for r in &mut reports {
        r.per_partition.clear();
    }
    assert_eq!(read_json_reports(&path).unwrap(), reports);
}

#[test]
fn thread_count_does_not_change_output() {
    let mut c = ExperimentConfig::new(vec![
        WorkloadSpec::Random {
            n: 200,
            density: 0.1,
            seed: 4,
        },
        WorkloadSpec::Band { n: 200, k: 16 },
    ]);
    c.verify_spmv = true;
    let one = run_experiment(&c, Some(1)).unwrap();
    let many = run_experiment(&c, Some(5)).unwrap();
    assert_eq!(one, many);
    assert_eq!(to_csv(&one, ""), to_csv(&many, ""));
}

#[test]
fn band_suite_rankings() {
    let workloads = [1, 2, 4, 16, 32, 64].map(|k| WorkloadSpec::Band { n: 512, k }).to_vec();
    let reports = run_experiment(&ExperimentConfig::new(workloads), None).unwrap();
    let table = normalize_summary(&reports).unwrap();
    assert!(table
        .rows
        .iter()
        .all(|r| r.scores.to_array().iter().all(|s| (0.0..=1.0).contains(s))));

    let column = |name| MetricSet::NAMES.iter().position(|n| *n == name).unwrap();
    let by_util = table.ranking("band", column("bandwidth_utilization"));
    let by_sigma = table.ranking("band", column("avg_sigma"));
    let by_latency = table.ranking("band", column("total_latency"));
    let top_half = |ranking: &[FormatId], f| ranking.iter().position(|x| *x == f).unwrap() < 4;
    assert!(top_half(&by_util, FormatId::Dia), "{by_util:?}");
    assert!(top_half(&by_sigma, FormatId::Ell), "{by_sigma:?}");
    assert!(top_half(&by_latency, FormatId::Ell), "{by_latency:?}");
}
