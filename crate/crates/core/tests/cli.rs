//! CLI contract tests: library-vs-CLI identity, file-format contracts, and
//! error codes. The byte-identical-rerun criterion lives in the acceptance
//! suite.

use std::path::Path;
use std::process::{Command, Output};

use hodgelab::experiments::{self, ExperimentConfig, Metric, SchemeTemplate};
use hodgelab::graph::{ComparisonRecord, PairGraph};
use hodgelab::sampling::Scheme;
use hodgelab::{hodge, io, rng, spectral};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hodgelab"));
    c.env_remove("HODGE_SEED");
    c
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn hodgelab");
    assert!(
        out.status.success(),
        "`hodgelab {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("spawn hodgelab");
    assert!(!out.status.success(), "expected failure for {args:?}");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).to_string(),
    )
}

fn write_records(path: &Path, records: &[ComparisonRecord]) {
    io::write_records_csv(path, records).unwrap();
}

/// Random 8-vertex record file used by the identity tests.
fn fixture_records() -> Vec<ComparisonRecord> {
    use rand::Rng;
    let mut r = rng::stream(33, &[1]);
    let mut records = Vec::new();
    for i in 0..8usize {
        for j in (i + 1)..8 {
            if r.gen::<f64>() < 0.7 {
                for _ in 0..r.gen_range(1..3) {
                    records.push(ComparisonRecord::new(i, j, r.gen_range(-1.0f64..1.0)));
                }
            }
        }
    }
    // A spanning path keeps the graph connected.
    for i in 0..7 {
        records.push(ComparisonRecord::new(i, i + 1, 0.25));
    }
    records
}

#[test]
fn rank_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let records = fixture_records();
    write_records(&path, &records);

    let out = run_ok(&["rank", "--records", path.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();

    // Compare against the file as written (values round to 12 significant
    // digits on export).
    let stored = io::read_records_csv(&path).unwrap();
    let graph = PairGraph::from_records(8, &stored).unwrap();
    let score = hodge::hodge_rank(&graph).unwrap();
    let lambda2 = spectral::fiedler(&graph).unwrap().fiedler_value;

    let scores = parsed["scores"].as_array().unwrap();
    assert_eq!(scores.len(), 8);
    for (k, v) in scores.iter().enumerate() {
        assert_eq!(v.as_f64().unwrap(), io::sig12(score.x[k]), "score {k}");
    }
    assert_eq!(parsed["lambda2"].as_f64().unwrap(), io::sig12(lambda2));
    assert_eq!(
        parsed["sensitivity"].as_f64().unwrap(),
        io::sig12(1.0 / lambda2)
    );
}

#[test]
fn rank_fixtures_consistent_and_cyclic() {
    let dir = tempfile::tempdir().unwrap();

    // Consistent K3 generated from x = (1, 0, -1).
    let consistent = dir.path().join("consistent.csv");
    write_records(
        &consistent,
        &[
            ComparisonRecord::new(0, 1, 1.0),
            ComparisonRecord::new(1, 2, 1.0),
            ComparisonRecord::new(0, 2, 2.0),
        ],
    );
    let out = run_ok(&["rank", "--records", consistent.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let scores: Vec<f64> = parsed["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in scores.iter().zip([1.0, 0.0, -1.0]) {
        assert!((got - want).abs() < 1e-9);
    }

    // Cyclic K3: zero scores, all mass in the curl component.
    let cyclic = dir.path().join("cyclic.csv");
    write_records(
        &cyclic,
        &[
            ComparisonRecord::new(0, 1, 1.0),
            ComparisonRecord::new(1, 2, 1.0),
            ComparisonRecord::new(2, 0, 1.0),
        ],
    );
    let out = run_ok(&["rank", "--records", cyclic.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for v in parsed["scores"].as_array().unwrap() {
        assert_eq!(v.as_f64().unwrap(), 0.0);
    }
    let out = run_ok(&["decompose", "--records", cyclic.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(parsed["norms"]["curl"].as_f64().unwrap() > 1.7);
    assert!(parsed["norms"]["gradient"].as_f64().unwrap() < 1e-10);
}

#[test]
fn simulate_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("results.csv");
    run_ok(&[
        "simulate",
        "--n",
        "10",
        "--trials",
        "30",
        "--op",
        "0.1",
        "--p0",
        "1.5,2",
        "--schemes",
        "with,without,greedy",
        "--seed",
        "21",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let cli_text = std::fs::read_to_string(&out_path).unwrap();

    let config = ExperimentConfig {
        n: 10,
        sampler_grid: vec![
            SchemeTemplate::new(Scheme::WithReplacement),
            SchemeTemplate::new(Scheme::WithoutReplacement),
            SchemeTemplate::new(Scheme::Greedy),
        ],
        p0_grid: vec![1.5, 2.0],
        trials: 30,
        outlier_percentage: 0.1,
        base_seed: 21,
        metric: Metric::L2Centered,
    };
    let cells = experiments::run_ensemble(&config).unwrap();
    assert_eq!(cli_text, io::result_csv(&cells));
}

#[test]
fn simulate_accepts_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        n: 8,
        sampler_grid: vec![SchemeTemplate::new(Scheme::WithoutReplacement)],
        p0_grid: vec![2.0],
        trials: 10,
        outlier_percentage: 0.0,
        base_seed: 3,
        metric: Metric::L2Centered,
    };
    let cfg_path = dir.path().join("config.json");
    io::write_config_json(&cfg_path, &config).unwrap();
    let out = run_ok(&["simulate", "--config", cfg_path.to_str().unwrap()]);
    let cells = experiments::run_ensemble(&config).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), io::result_csv(&cells));
}

#[test]
fn sample_p0_conversion_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    run_ok(&[
        "sample",
        "--scheme",
        "without",
        "--n",
        "16",
        "--p0",
        "3",
        "--seed",
        "1",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "i,j,weight");
    assert_eq!(csv.lines().count() - 1, 63, "m = ceil(3 * 15 * ln(16) / 2)");
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(sidecar["m"].as_u64().unwrap(), 63);
    assert_eq!(sidecar["scheme"].as_str().unwrap(), "without_replacement");
}

#[test]
fn sweep_format_contract() {
    let out = run_ok(&[
        "sweep", "--n", "16", "--p0", "1.5:4", "--trials", "5", "--seed", "7",
    ]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,n,m,p0,lambda2_over_d,dmin_over_d,a1,a2,a_theorem1"
    );
    // Grid 1.5:4 doubles to {1.5, 3} then appends 4; three schemes.
    assert_eq!(lines.count(), 9);
}

#[test]
fn estimate_values_and_precision() {
    let out = run_ok(&["estimate", "--p0", "200"]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let value: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.9).abs() < 0.01);

    let out = run_ok(&["estimate", "--p0", "8", "--n", "64"]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let a1: f64 = row[3].parse().unwrap();
    let a2: f64 = row[4].parse().unwrap();
    assert!((a1 - 0.507874507874).abs() < 1e-9);
    assert!((a2 - 0.653539463077).abs() < 1e-9);
}

#[test]
fn ingest_roundtrip_against_generator() {
    // Synthetic complete-graph data from the simulation generator: the
    // ingested reference score must match ranking the full graph directly.
    let dir = tempfile::tempdir().unwrap();
    let n = 16;
    let truth = experiments::generate_ground_truth(n, 9);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    let complete = PairGraph::from_topology(n, pairs).unwrap();
    // 32 complete rounds at OP = 0.
    let mut records = Vec::new();
    for round in 0..32 {
        records.extend(experiments::generate_comparisons(&truth, &complete, 0.0, round).unwrap());
    }
    assert_eq!(records.len(), 32 * 120);
    let path = dir.path().join("rounds.csv");
    write_records(&path, &records);

    let out = run_ok(&["ingest", "--records", path.to_str().unwrap(), "--n", "16"]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();

    let (graph, score) = experiments::ingest_dataset(&path, n).unwrap();
    // Every pair carries exactly 32 records.
    assert!(graph.edges().all(|(_, _, e)| e.weight == 32.0));
    for (k, v) in parsed["scores"].as_array().unwrap().iter().enumerate() {
        assert_eq!(v.as_f64().unwrap(), io::sig12(score.x[k]));
    }

    // The graph export can be ranked directly.
    let gexp = dir.path().join("full");
    run_ok(&[
        "ingest",
        "--records",
        path.to_str().unwrap(),
        "--n",
        "16",
        "--graph-out",
        gexp.to_str().unwrap(),
    ]);
    let out = run_ok(&["rank", "--graph", gexp.to_str().unwrap()]);
    let reranked: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for (k, v) in reranked["scores"].as_array().unwrap().iter().enumerate() {
        let direct = parsed["scores"][k].as_f64().unwrap();
        assert!((v.as_f64().unwrap() - direct).abs() <= 1e-9);
    }
}

#[test]
fn error_contracts() {
    let dir = tempfile::tempdir().unwrap();

    // Disconnected input names the machine-readable code.
    let disc = dir.path().join("disc.csv");
    write_records(
        &disc,
        &[
            ComparisonRecord::new(0, 1, 1.0),
            ComparisonRecord::new(2, 3, 1.0),
        ],
    );
    let (code, stderr) = run_err(&["rank", "--records", disc.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error[disconnected]:"), "{stderr}");
    assert_eq!(stderr.lines().count(), 1, "single-line error contract");

    // Unknown scheme.
    let (code, stderr) = run_err(&[
        "sample",
        "--scheme",
        "sideways",
        "--n",
        "8",
        "--m",
        "10",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error[invalid-input]:"), "{stderr}");

    // Over-complete budget for simple-graph sampling.
    let (code, stderr) = run_err(&[
        "sample",
        "--scheme",
        "without",
        "--n",
        "5",
        "--m",
        "11",
        "--out",
        dir.path().join("y").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error[budget]:"), "{stderr}");

    // Below the connectivity threshold.
    let (code, stderr) = run_err(&["estimate", "--p0", "0.5"]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error[domain]:"), "{stderr}");

    // Malformed row carries its line number.
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "i,j,value,annotator\n0,1,1.0,\n0,oops,1.0,\n").unwrap();
    let (_, stderr) = run_err(&["rank", "--records", bad.to_str().unwrap()]);
    assert!(
        stderr.starts_with("error[parse]:") && stderr.contains("line 3"),
        "{stderr}"
    );

    // Missing required input combination.
    let (_, stderr) = run_err(&["rank"]);
    assert!(stderr.starts_with("error[invalid-input]:"), "{stderr}");
}

#[test]
fn hodge_seed_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_ok(&[
        "sample",
        "--scheme",
        "without",
        "--n",
        "10",
        "--m",
        "20",
        "--seed",
        "5",
        "--out",
        a.to_str().unwrap(),
    ]);
    let out = bin()
        .env("HODGE_SEED", "5")
        .args([
            "sample",
            "--scheme",
            "without",
            "--n",
            "10",
            "--m",
            "20",
            "--out",
            b.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let bytes_a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let bytes_b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(bytes_a, bytes_b);
}
