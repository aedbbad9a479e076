mod common;

use std::fs;
use std::io::Write;

use proptest::prelude::*;
use rand::Rng;

use polyak::data::{
    load_csv, load_libsvm, standardize, write_csv, write_libsvm, Dataset, LabelColumn,
};
use polyak::linalg::largest_eigenvalue;
use polyak::{Error, Matrix, Vector};

fn sonar_like(dir: &std::path::Path) -> std::path::PathBuf {
    let mut r = common::rng(208);
    let path = dir.join("sonar.all-data");
    let mut f = fs::File::create(&path).unwrap();
    for i in 0..208 {
        let row: Vec<String> = (0..60)
            .map(|_| format!("{:.4}", r.random_range(0.0..1.0)))
            .collect();
        writeln!(f, "{},{}", row.join(","), if i < 97 { "R" } else { "M" }).unwrap();
    }
    path
}

#[test]
fn sonar_shaped_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = load_csv(sonar_like(dir.path()), LabelColumn::Last, false).unwrap();
    assert_eq!((d.rows(), d.cols()), (208, 60));
    assert_eq!(d.label_classes, 2);
    assert_eq!(d.labels.iter().filter(|y| **y == 1.0).count(), 97);
    assert_eq!(d.labels.iter().filter(|y| **y == -1.0).count(), 111);
}

#[test]
fn loading_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let src = sonar_like(dir.path());
    let a = load_csv(&src, LabelColumn::Last, false).unwrap();
    let b = load_csv(&src, LabelColumn::Last, false).unwrap();
    assert_eq!(a.features, b.features);
    write_csv(&a, dir.path().join("a.csv")).unwrap();
    write_csv(&b, dir.path().join("b.csv")).unwrap();
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn standardized_sonar_has_target_smoothness() {
    let dir = tempfile::tempdir().unwrap();
    let d = load_csv(sonar_like(dir.path()), LabelColumn::Last, false).unwrap();
    let s = standardize(&d, None).unwrap();
    for col in s.features.column_iter() {
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 208.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
    }
    let t = standardize(&d, Some(1.0)).unwrap();
    assert!((largest_eigenvalue(&t.features.tr_mul(&t.features)) - 1.0).abs() < 1e-8);
}

#[test]
fn malformed_files_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "# comment\n1,2,1\n3,x,-1\n").unwrap();
    match load_csv(&path, LabelColumn::Last, false) {
        Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "").unwrap();
    assert!(matches!(
        load_csv(&path, LabelColumn::Last, false),
        Err(Error::EmptyData)
    ));
}

fn sparse_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..8, 1usize..6, any::<u64>()).prop_map(|(m, n, seed)| {
        let mut r = common::rng(seed);
        let features = Matrix::from_fn(m, n, |_, _| {
            if r.random_bool(0.4) {
                0.0
            } else {
                r.random_range(-5.0..5.0)
            }
        });
        let labels = Vector::from_fn(m, |_, _| if r.random_bool(0.5) { 1.0 } else { -1.0 });
        Dataset::new(features, labels, "random").unwrap()
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip(d in sparse_dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.svm");
        write_libsvm(&d, &path).unwrap();
        let back = load_libsvm(&path).unwrap();
        prop_assert_eq!(&back.features, &d.features);
        prop_assert_eq!(&back.labels, &d.labels);
    }

    #[test]
    fn csv_round_trip(d in sparse_dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&d, &path).unwrap();
        let back = load_csv(&path, LabelColumn::Last, false).unwrap();
        prop_assert_eq!(&back.features, &d.features);
        // a single observed class keeps its sign
        prop_assert_eq!(&back.labels, &d.labels);
    }
}
