use proptest::prelude::*;

use hdms_core::prediction::{
    benchmark, evaluate, k_sweep, knn_neighbors, knn_predict, load_dataset, read_dataset, split, wknn_predict,
    write_bench_csv, write_trace_csv, Classifier, Dataset, ScaConfig, ScaWknnModel, K_SWEEP, TRAIN_RATIO,
};
use hdms_core::{Dataset32, Dataset64};

const DATASET: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/heart_cleveland.csv");

#[test]
fn cleveland_rows_with_missing_values_are_dropped() {
    let ds: Dataset64 = load_dataset(DATASET).unwrap();
    assert_eq!(ds.len(), 297);
    assert_eq!(ds.dim(), 13);
    assert_eq!(ds.class_counts(), [160, 137]);
}

#[test]
fn split_is_stratified_and_seeded() {
    let ds: Dataset64 = load_dataset(DATASET).unwrap();
    let (train, test) = split(&ds, TRAIN_RATIO, 4);
    assert_eq!(train.len() + test.len(), ds.len());
    assert_eq!(train.class_counts(), [112, 96]);
    let (again, _) = split(&ds, TRAIN_RATIO, 4);
    assert_eq!(train, again);
}

#[test]
fn single_and_double_precision_agree_on_labels() {
    let d64: Dataset64 = load_dataset(DATASET).unwrap();
    let d32: Dataset32 = load_dataset(DATASET).unwrap();
    let (train64, test64) = split(&d64, TRAIN_RATIO, 2);
    let (train32, test32) = split(&d32, TRAIN_RATIO, 2);
    let mut disagreements = 0;
    for (q64, q32) in test64.features.iter().zip(&test32.features) {
        let a = knn_predict(&knn_neighbors(q64, &train64, 5).unwrap());
        let b = knn_predict(&knn_neighbors(q32, &train32, 5).unwrap());
        disagreements += usize::from(a != b);
    }
    assert!(disagreements <= 1, "{disagreements} label disagreements");
}

#[test]
fn benchmark_reports_three_classifiers_and_is_reproducible() {
    let ds: Dataset64 = load_dataset(DATASET).unwrap();
    let cfg = ScaConfig::new(10, 15, 5, 3);
    let a = benchmark(&ds, &cfg).unwrap();
    let b = benchmark(&ds, &cfg).unwrap();
    let names: Vec<&str> = a.rows.iter().map(|r| r.classifier.as_str()).collect();
    assert_eq!(names, ["KNN", "WKNN", "SCA-WKNN"]);
    assert_eq!(a.best_weights, b.best_weights);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.train_rows + a.test_rows, 297);

    let mut csv = Vec::new();
    write_bench_csv(&a.rows, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("classifier,accuracy,precision,recall,f_measure,rmse,time_ms\n"));
    let mut trace = Vec::new();
    write_trace_csv(&a.trace, &mut trace).unwrap();
    assert_eq!(String::from_utf8(trace).unwrap().lines().count(), 1 + 16);
}

#[test]
fn sweep_covers_each_k() {
    let ds: Dataset64 = load_dataset(DATASET).unwrap();
    let rows = k_sweep(&ds, &ScaConfig::new(4, 3, 1, 1), &K_SWEEP).unwrap();
    let ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    assert_eq!(ks, [1, 1, 1, 3, 3, 3, 5, 5, 5, 7, 7, 7]);
}

#[test]
fn model_scales_raw_queries() {
    let ds: Dataset64 = load_dataset(DATASET).unwrap();
    let (train, test) = split(&ds, TRAIN_RATIO, 1);
    let model = ScaWknnModel::fit(&train, &ScaConfig::new(8, 10, 5, 1)).unwrap();
    let (report, preds) = evaluate(&test, &model).unwrap();
    assert_eq!(preds.len(), test.len());
    assert!(report.accuracy > 0.6, "accuracy {}", report.accuracy);
    assert_eq!(model.name(), "SCA-WKNN");
}

#[test]
fn malformed_csv_reports_position() {
    let text = "age,sex,target\n63,1,0\n70,x,1\n";
    let err = read_dataset::<f64, _>(text.as_bytes()).unwrap_err().to_string();
    assert!(err.contains('3') || err.contains("line"), "{err}");
}

#[test]
fn too_large_k_is_a_config_error() {
    let ds = Dataset::<f64>::from_rows(vec![vec![0.0], vec![1.0]], vec![0, 1]).unwrap();
    assert!(knn_neighbors(&[0.5], &ds, 3).is_err());
    assert!(knn_neighbors(&[0.5], &ds, 0).is_err());
}

fn small_dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u8>)> {
    (3usize..25).prop_flat_map(|n| {
        (
            proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 3), n),
            proptest::collection::vec(0u8..2, n),
        )
    })
}

proptest! {
    #[test]
    fn neighbors_are_sorted_and_unique((features, labels) in small_dataset(), q in proptest::collection::vec(0.0f64..1.0, 3), k in 1usize..4) {
        let ds = Dataset::from_rows(features, labels).unwrap();
        let k = k.min(ds.len());
        let phi = knn_neighbors(&q, &ds, k).unwrap();
        prop_assert_eq!(phi.len(), k);
        prop_assert!(phi.windows(2).all(|w| (w[0].distance, w[0].index) < (w[1].distance, w[1].index)));
    }

    #[test]
    fn equal_weights_match_majority((features, labels) in small_dataset(), q in proptest::collection::vec(0.0f64..1.0, 3), k in 1usize..4) {
        let ds = Dataset::from_rows(features, labels).unwrap();
        let k = k.min(ds.len());
        let phi = knn_neighbors(&q, &ds, k).unwrap();
        prop_assert_eq!(wknn_predict(&phi, &vec![0.37; k]).unwrap(), knn_predict(&phi));
    }
}
