mod common;

use std::io::Write;

use proptest::prelude::*;
use validom::datasets::{
    build_lag_features, generate_dataset, load_timeseries_csv, DatasetSpec, LagSpec, PointCloud,
    ScaleMode, Scaler, Shape, Table,
};
use validom::Error;

#[test]
fn two_circles_split_into_two_single_linkage_clusters() {
    let spec = DatasetSpec::new(Shape::TwoCircles, 400, 7);
    let cloud = generate_dataset(&spec).unwrap();
    // the disks are 1.6 apart at the rim, so any cut between the sampling
    // spacing and that gap separates them
    assert_eq!(common::single_linkage_components(&cloud, 0.8), 2);
    assert_eq!(
        common::single_linkage_components(&cloud, 2.0 + 1.2 * 2.0),
        1
    );
}

#[test]
fn every_shape_is_reproducible_and_bounded() {
    for shape in Shape::ALL {
        let spec = DatasetSpec::new(shape, 600, 9);
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        assert_eq!(a, b);
        let (lo, hi) = spec.bounding_box();
        let slack = 4.0 * spec.noise_sigma + 1e-12;
        for p in a.points() {
            for d in 0..2 {
                assert!(
                    p[d] >= lo[d] - slack && p[d] <= hi[d] + slack,
                    "{shape}: {p:?}"
                );
            }
            assert!(
                spec.holes.iter().all(|h| !h.contains(p)),
                "{shape}: {p:?} in hole"
            );
        }
    }
}

#[test]
fn timeseries_reader_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "x1,x2,x3,x4,x5\n1,2,3,4,5\n1,2,oops,4,5\n1,2,3,4,5").unwrap();
    drop(f);
    match load_timeseries_csv(&path, &["x1", "x3"]) {
        Err(Error::NonNumeric { row, column, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(column, "x3");
        }
        other => panic!("unexpected {other:?}"),
    }
    let t = load_timeseries_csv(&path, &["x1", "x2"]).unwrap();
    assert_eq!(t.n_rows(), 3);
    assert!(matches!(
        load_timeseries_csv(&path, &["x9"]),
        Err(Error::MissingColumn(_))
    ));
}

#[test]
fn twenty_lagged_features() {
    let names: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    let table = Table {
        names: names.clone(),
        columns: (0..5)
            .map(|s| (0..30).map(|k| (100 * s + k) as f64).collect())
            .collect(),
    };
    let spec = LagSpec::new(names, vec![0, 5, 7, 9]).unwrap();
    let f = build_lag_features(&table, &spec).unwrap();
    assert_eq!(f.dim(), 20);
    assert_eq!(f.len(), 30 - 9);
    let row = f.point(0);
    assert_eq!(
        spec.feature_index("x2", 7).map(|i| row[i]),
        Some(100.0 + 9.0 - 7.0)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaler_round_trip(
        pts in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 3), 2..30),
        probe in prop::collection::vec(-1e4..1e4f64, 3),
        standardize in any::<bool>(),
    ) {
        let cloud = PointCloud::new(pts).unwrap();
        let mode = if standardize { ScaleMode::Standardize } else { ScaleMode::MinmaxToUnitIntervalSigned };
        if let Ok(s) = Scaler::fit(&cloud, mode) {
            let back = s.invert(&s.apply(&probe));
            for (a, b) in back.iter().zip(&probe) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            prop_assert!(s.gains.iter().all(|g| *g > 0.0));
        }
    }

    #[test]
    fn constant_signal_gives_equal_lags(c in -10.0..10.0f64, len in 10usize..40) {
        let table = Table { names: vec!["a".into()], columns: vec![vec![c; len]] };
        let spec = LagSpec::new(vec!["a".into()], vec![0, 2, 5]).unwrap();
        let f = build_lag_features(&table, &spec).unwrap();
        prop_assert!(f.points().iter().all(|p| p.iter().all(|v| *v == c)));
    }
}
