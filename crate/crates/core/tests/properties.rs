use proptest::prelude::*;
use spformat::cost::{compute_latency, evaluate, CostConfig};
use spformat::formats::worst_case_lengths;
use spformat::{
    decode, decode_rows, encode, partition, spmv_dense, spmv_partitioned, FormatId, FormatParams, Partition,
    SparseMatrix,
};

fn format_strategy() -> impl Strategy<Value = FormatId> {
    prop::sample::select(FormatId::ALL.to_vec())
}

/// A `p x p` tile with a random subset of cells set to non-zero values.
fn tile_strategy() -> impl Strategy<Value = Partition> {
    prop::sample::select(vec![4usize, 8, 16]).prop_flat_map(|p| {
        prop::collection::vec((0..p, 0..p, -8i32..8), 0..=p * p).prop_map(move |cells| {
            let triplets = cells
                .into_iter()
                .map(|(r, c, v)| (r, c, if v == 0 { 0.5 } else { v as f64 * 0.75 }));
            let mut values = vec![0.0; p * p];
            for (r, c, v) in triplets {
                values[r * p + c] = v;
            }
            Partition::new(0, 0, p, values).unwrap()
        })
    })
}

fn matrix_strategy() -> impl Strategy<Value = SparseMatrix> {
    (1usize..40, 1usize..40).prop_flat_map(|(rows, cols)| {
        prop::collection::vec((0..rows, 0..cols, -100.0f64..100.0), 0..200)
            .prop_map(move |t| SparseMatrix::from_triplets(rows, cols, t).unwrap())
    })
}

proptest! {
    #[test]
    fn round_trip(tile in tile_strategy(), format in format_strategy()) {
        let enc = encode(&tile, format, &FormatParams::default()).unwrap();
        prop_assert_eq!(decode(&enc).unwrap(), tile);
    }

    #[test]
    fn decode_rows_agrees_with_decode(tile in tile_strategy(), format in format_strategy()) {
        let enc = encode(&tile, format, &FormatParams::default()).unwrap();
        let rows = decode_rows(&enc).unwrap();
        prop_assert_eq!(rows.len(), enc.emitted_rows());
        let decoded = decode(&enc).unwrap();
        let p = tile.p();
        for r in 0..p {
            let emitted = rows.iter().find(|(row, _)| *row == r);
            match emitted {
                Some((_, values)) => prop_assert_eq!(values.as_slice(), decoded.row(r)),
                // an omitted row must be all zero in the source
                None => prop_assert_eq!(tile.row_nnz(r), 0),
            }
        }
    }

    #[test]
    fn arrays_within_worst_case(tile in tile_strategy(), format in format_strategy()) {
        let params = FormatParams::default();
        let enc = encode(&tile, format, &params).unwrap();
        let bounds = worst_case_lengths(tile.p(), format, &params);
        for array in &enc.arrays {
            let bound = bounds.iter().find(|b| b.name == array.name).unwrap();
            prop_assert!(array.len() <= bound.max_len(), "{} {} {} > {}", format, array.name, array.len(), bound.max_len());
        }
    }

    #[test]
    fn coo_utilization_is_one_third(tile in tile_strategy()) {
        prop_assume!(tile.nnz() > 0);
        let enc = encode(&tile, FormatId::Coo, &FormatParams::default()).unwrap();
        prop_assert_eq!(3 * enc.useful_bytes(), enc.total_bytes());
    }

    #[test]
    fn ell_compute_is_pattern_independent(tile in tile_strategy()) {
        let p = tile.p();
        let cfg = CostConfig::default();
        let enc = encode(&tile, FormatId::Ell, &FormatParams::default()).unwrap();
        let (_, compute) = compute_latency(&enc, &cfg);
        prop_assert_eq!(compute, p as u64 * cfg.assign_cycles + p as u64 * cfg.dot_latency(p));
    }

    #[test]
    fn dense_sigma_is_one(tile in tile_strategy()) {
        let enc = encode(&tile, FormatId::Dense, &FormatParams::default()).unwrap();
        prop_assert_eq!(evaluate(&enc, &CostConfig::default()).sigma, 1.0);
    }

    #[test]
    fn partition_reconstructs(m in matrix_strategy(), p in 2usize..9) {
        let grid = partition(&m, p).unwrap();
        prop_assert_eq!(grid.to_triplets(), m.entries().to_vec());
        prop_assert!(grid.tiles.iter().all(|t| t.nnz() > 0));
        prop_assert!(grid.tiles.windows(2).all(|w| (w[0].grid_row, w[0].grid_col) < (w[1].grid_row, w[1].grid_col)));
    }

    #[test]
    fn partitioned_spmv_matches_dense(m in matrix_strategy(), p in prop::sample::select(vec![2usize, 4, 8]), format in format_strategy()) {
        let x: Vec<f64> = (0..m.n_cols()).map(|i| (i as f64 * 0.37).sin()).collect();
        let grid = partition(&m, p).unwrap();
        let params = FormatParams { bcsr_block: 2, ..FormatParams::default() };
        let y = spmv_partitioned(&grid, format, &params, &x).unwrap();
        let reference = spmv_dense(&m, &x).unwrap();
        for (a, b) in y.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
