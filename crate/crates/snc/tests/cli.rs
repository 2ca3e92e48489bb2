use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use snc::export::ReliabilityMapDocument;
use snc::io::write_matrix;
use snc::{read_json, ScoresDocument};
use snc_core::{compute_snc, Matrix, MetricConfig, PairedEmbedding, RngStream};

fn snc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snc")).args(args).output().expect("binary runs")
}

fn blobs(n: usize, dim: usize, seed: u64) -> Matrix {
    use rand::Rng;
    let mut rng = RngStream::new(seed, 0);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..dim).map(|c| if c == i % dim { 6.0 } else { 0.0 } + rng.random::<f64>()).collect())
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

fn write_pair(dir: &Path, high: &Matrix, low: &Matrix) -> (String, String) {
    let (h, l) = (dir.join("high.csv"), dir.join("low.csv"));
    write_matrix(&h, high).unwrap();
    write_matrix(&l, low).unwrap();
    (h.to_str().unwrap().into(), l.to_str().unwrap().into())
}

#[test]
fn self_projection_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let x = blobs(60, 2, 1);
    let (h, l) = write_pair(dir.path(), &x, &x);
    let out = dir.path().join("scores.json");
    let map = dir.path().join("map.json");
    let o = snc(&[
        "compute", "--high", &h, "--low", &l, "--k", "8", "--iterations", "30",
        "--out", out.to_str().unwrap(), "--map", map.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: ScoresDocument = read_json(&out).unwrap();
    assert_eq!((doc.steadiness, doc.cohesiveness), (1.0, 1.0));
    let m: ReliabilityMapDocument = read_json(&map).unwrap();
    assert_eq!(m.schema_version, "1");
    assert_eq!(m.points.len(), 60);
    assert!(m.edges.iter().all(|e| e.false_groups_raw == 0.0 && e.missing_groups_raw == 0.0));
}

#[test]
fn scores_file_matches_library_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let high = blobs(80, 4, 2);
    let low = blobs(80, 2, 3);
    let (h, l) = write_pair(dir.path(), &high, &low);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = snc(&[
            "compute", "--high", &h, "--low", &l, "--k", "10", "--iterations", "40", "--seed", "7",
            "--clustering", "kmeans:4", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    let doc: ScoresDocument = serde_json::from_slice(&a).unwrap();
    let config = MetricConfig {
        k_snn: 10,
        iterations: 40,
        seed: 7,
        clustering: snc_core::ClusteringChoice::KMeans(4),
        ..Default::default()
    };
    let e = PairedEmbedding::new(high, low).unwrap();
    let lib = compute_snc(&e, &config).unwrap();
    assert!((doc.steadiness - lib.scores.steadiness).abs() < 1e-12);
    assert!((doc.cohesiveness - lib.scores.cohesiveness).abs() < 1e-12);
    assert_eq!(doc.config, config);
    assert!(doc.elapsed_seconds.is_none());
}

#[test]
fn usage_errors_exit_2() {
    let o = snc(&["compute", "--low", "x.csv", "--out", "y.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--high"));
    let o = snc(&["compute", "--high", "a", "--low", "b", "--out", "c", "--clustering", "dbscan"]);
    assert_eq!(o.status.code(), Some(2));
    let o = snc(&["compute", "--high", "a", "--low", "b", "--out", "c", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_snc")).env("SNC_THREADS", "zero").arg("selftest").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = snc(&[
        "compute", "--high", missing.to_str().unwrap(), "--low", missing.to_str().unwrap(), "--out", "x.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));
    // k must stay below N
    let (h, l) = write_pair(dir.path(), &blobs(10, 2, 1), &blobs(10, 2, 2));
    let out = dir.path().join("s.json");
    let o = snc(&["compute", "--high", &h, "--low", &l, "--k", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn baselines_table() {
    let dir = tempfile::tempdir().unwrap();
    let x = blobs(40, 3, 4);
    let (h, l) = write_pair(dir.path(), &x, &x);
    let out = dir.path().join("b.csv");
    let o = snc(&["baselines", "--high", &h, "--low", &l, "--k", "3", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "metric,k,score");
    // tnc + mrre + lcmc at two k
    assert_eq!(lines.len(), 1 + 5 * 2);
    assert!(lines.contains(&"trustworthiness,5,1"));
}

#[test]
fn experiment_writes_results_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let o = snc(&[
        "experiment", "A", "--seeds", "2", "--points-per-sphere", "20", "--controls", "60,20,0",
        "--snc-k", "6", "--baseline-k", "3", "--iterations", "10", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("metric,control_value,seed,k,score\n"));
    // 3 controls × 2 seeds × 6 metrics × 1 k
    assert_eq!(csv.lines().count(), 1 + 36);
    let report: snc::experiments::RegressionReport = read_json(&out.join("report.json")).unwrap();
    assert_eq!(report.trends.len(), 6);
}

#[test]
fn selftest_passes() {
    let o = snc(&["selftest", "--instances", "40"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
