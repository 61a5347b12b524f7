//! File formats shared by the library and the CLI.
//!
//! - comparison records: CSV with header `i,j,value,annotator`
//! - graph export: edge-list CSV `i,j,weight` plus a JSON sidecar with the
//!   sampler parameters needed to regenerate it
//! - scores: JSON `{scores, lambda2, sensitivity, residual_norm}`
//! - decomposition: JSON with edge flows keyed `"i-j"` (i < j)
//! - ensemble results and estimator sweeps: CSV, one row per cell
//!
//! All real numbers are rounded to 12 significant digits before encoding, so
//! repeated runs produce byte-identical files on any platform.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{CellResult, ExperimentConfig, SweepRow};
use crate::graph::{ComparisonRecord, EdgeFlow, PairGraph};
use crate::hodge::{GlobalScore, HodgeDecomposition};
use crate::sampling::{SamplerSpec, Scheme};

/// Round to 12 significant digits. Output formatting goes through this so
/// fractional values are reproducible across platforms.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}")
        .parse()
        .expect("roundtrip of finite f64")
}

/// Canonical text form of a real number: shortest representation of its
/// 12-significant-digit rounding.
pub fn fmt_f64(x: f64) -> String {
    format!("{}", sig12(x))
}

fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(sig12(x))
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

// --- comparison records ---

/// Read a comparison-record CSV (`i,j,value,annotator`; annotator may be
/// empty). Malformed rows are rejected with their line number.
pub fn read_records_csv(path: &Path) -> Result<Vec<ComparisonRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                reason: e.to_string(),
            })?
            .clone();
        let expected = ["i", "j", "value", "annotator"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                line: 1,
                reason: format!("expected header i,j,value,annotator, got {headers:?}"),
            });
        }
    }

    let mut records = Vec::new();
    for result in reader.records() {
        let row = result.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let parse_usize = |idx: usize, name: &str| -> Result<usize> {
            row.get(idx)
                .ok_or(())
                .and_then(|s| s.parse().map_err(|_| ()))
                .map_err(|_| Error::Parse {
                    line,
                    reason: format!("bad {name} field"),
                })
        };
        let i = parse_usize(0, "i")?;
        let j = parse_usize(1, "j")?;
        let value: f64 = row
            .get(2)
            .ok_or(())
            .and_then(|s| s.parse().map_err(|_| ()))
            .map_err(|_| Error::Parse {
                line,
                reason: "bad value field".to_string(),
            })?;
        let annotator = match row.get(3) {
            Some("") | None => None,
            Some(s) => Some(s.to_string()),
        };
        records.push(ComparisonRecord {
            i,
            j,
            value,
            annotator,
        });
    }
    Ok(records)
}

pub fn write_records_csv(path: &Path, records: &[ComparisonRecord]) -> Result<()> {
    let mut out = String::from("i,j,value,annotator\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.i,
            r.j,
            fmt_f64(r.value),
            r.annotator.as_deref().unwrap_or("")
        );
    }
    fs::write(path, out)?;
    Ok(())
}

// --- graph export ---

/// Sidecar describing how an exported graph was generated.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphSidecar {
    pub n: usize,
    pub m: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub transition_p0: Option<f64>,
}

impl From<&SamplerSpec> for GraphSidecar {
    fn from(spec: &SamplerSpec) -> Self {
        Self {
            n: spec.n,
            m: spec.m,
            scheme: spec.scheme,
            seed: spec.seed,
            transition_p0: spec.transition_p0,
        }
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut p = prefix.as_os_str().to_owned();
    p.push(ext);
    PathBuf::from(p)
}

/// Write `<prefix>.csv` (edge list `i,j,weight`) and `<prefix>.json` (the
/// sidecar). Edges are emitted in canonical order.
pub fn write_graph(prefix: &Path, graph: &PairGraph, sidecar: &GraphSidecar) -> Result<()> {
    let mut out = String::from("i,j,weight\n");
    for (i, j, e) in graph.edges() {
        let _ = writeln!(out, "{i},{j},{}", fmt_f64(e.weight));
    }
    fs::write(with_extension(prefix, ".csv"), out)?;
    let json =
        serde_json::to_string_pretty(sidecar).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(with_extension(prefix, ".json"), json + "\n")?;
    Ok(())
}

/// Read an edge-list CSV written by [`write_graph`]. A fourth `mean` column
/// is accepted and carries edge flows; without it the graph's flow is zero.
pub fn read_graph_csv(path: &Path, n_hint: Option<usize>) -> Result<PairGraph> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    let has_mean = match header {
        "i,j,weight" => false,
        "i,j,weight,mean" => true,
        other => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("expected header i,j,weight[,mean], got '{other}'"),
            })
        }
    };
    let mut edges = Vec::new();
    let mut max_vertex = 0usize;
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx as u64 + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != if has_mean { 4 } else { 3 } {
            return Err(Error::Parse {
                line: lineno,
                reason: "wrong number of fields".to_string(),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: lineno,
                reason: format!("bad {what} field"),
            })
        };
        let i = parse(fields[0], "i")? as usize;
        let j = parse(fields[1], "j")? as usize;
        let w = parse(fields[2], "weight")?;
        let mean = if has_mean {
            parse(fields[3], "mean")?
        } else {
            0.0
        };
        max_vertex = max_vertex.max(i).max(j);
        edges.push((i, j, w, mean));
    }
    let n = n_hint.unwrap_or(max_vertex + 1).max(max_vertex + 1);
    PairGraph::from_edges(n, edges)
}

pub fn read_graph_sidecar(path: &Path) -> Result<GraphSidecar> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        reason: e.to_string(),
    })
}

// --- scores and decomposition ---

/// JSON for a ranked graph: the centered scores plus the spectral
/// stability numbers.
pub fn score_json(score: &GlobalScore, lambda2: f64, sensitivity: f64) -> String {
    let value = serde_json::json!({
        "scores": score.x.iter().map(|&v| json_num(v)).collect::<Vec<_>>(),
        "lambda2": json_num(lambda2),
        "sensitivity": json_num(sensitivity),
        "residual_norm": json_num(score.residual_norm),
    });
    serde_json::to_string_pretty(&value).expect("static shape") + "\n"
}

fn flow_object(flow: &EdgeFlow) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = flow
        .entries()
        .map(|(i, j, v)| (format!("{i}-{j}"), json_num(v)))
        .collect();
    serde_json::Value::Object(map)
}

/// JSON for a Hodge decomposition: potential, the three edge flows keyed
/// `"i-j"` with `i < j`, and their weighted norms.
pub fn decomposition_json(graph: &PairGraph, d: &HodgeDecomposition) -> String {
    let (ng, nh, nc) = d.component_norms(graph);
    let value = serde_json::json!({
        "potential": d.potential.x.iter().map(|&v| json_num(v)).collect::<Vec<_>>(),
        "gradient": flow_object(&d.gradient),
        "harmonic": flow_object(&d.harmonic),
        "curl": flow_object(&d.curl),
        "norms": {
            "gradient": json_num(ng),
            "harmonic": json_num(nh),
            "curl": json_num(nc),
        },
    });
    serde_json::to_string_pretty(&value).expect("static shape") + "\n"
}

// --- ensemble results and sweeps ---

pub const RESULT_CSV_HEADER: &str =
    "scheme,p0,m,mean_l2,std_l2,mean_lambda2,mean_dmin,connected_fraction,trials_used";

pub fn result_csv(cells: &[CellResult]) -> String {
    let mut out = String::from(RESULT_CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.scheme,
            fmt_f64(c.p0),
            c.m,
            fmt_f64(c.mean_l2),
            fmt_f64(c.std_l2),
            fmt_f64(c.mean_lambda2),
            fmt_f64(c.mean_dmin),
            fmt_f64(c.connected_fraction),
            c.trials_used
        );
    }
    out
}

/// Sweep CSV. The emitted columns extend the estimator tuple
/// `n,m,p0,lambda2_over_d,dmin_over_d,a1,a2,a_theorem1` with the scheme label
/// in front, since rows are per (scheme, p0).
pub const SWEEP_CSV_HEADER: &str = "scheme,n,m,p0,lambda2_over_d,dmin_over_d,a1,a2,a_theorem1";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.n,
            r.m,
            fmt_f64(r.p0),
            fmt_f64(r.lambda2_over_d),
            fmt_f64(r.dmin_over_d),
            fmt_f64(r.a1),
            fmt_f64(r.a2),
            fmt_f64(r.a_theorem1)
        );
    }
    out
}

// --- experiment config ---

pub fn read_config_json(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        reason: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn write_config_json(path: &Path, config: &ExperimentConfig) -> Result<()> {
    let json =
        serde_json::to_string_pretty(config).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments;
    use crate::hodge;
    use crate::sampling::{self, SamplerSpec};

    #[test]
    fn formatting_is_stable() {
        assert_eq!(fmt_f64(5.0), "5");
        assert_eq!(fmt_f64(1.5), "1.5");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_f64(-0.653539312345678), "-0.653539312346");
        assert_eq!(fmt_f64(1.23456789e-7), "0.000000123456789");
        assert_eq!(
            sig12(sig12(std::f64::consts::PI)),
            sig12(std::f64::consts::PI)
        );
    }

    #[test]
    fn records_roundtrip_and_line_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let records = vec![
            ComparisonRecord {
                i: 0,
                j: 1,
                value: 1.0,
                annotator: Some("a7".to_string()),
            },
            ComparisonRecord::new(1, 2, -0.5),
        ];
        write_records_csv(&path, &records).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(back, records);

        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "i,j,value,annotator\n0,1,1.0,\n0,x,1.0,\n").unwrap();
        match read_records_csv(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn graph_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("g");
        let spec = SamplerSpec::new(Scheme::WithReplacement, 6, 9, 4);
        let g = sampling::sample(&spec).unwrap();
        write_graph(&prefix, &g, &GraphSidecar::from(&spec)).unwrap();

        let csv_path = with_extension(&prefix, ".csv");
        let g2 = read_graph_csv(&csv_path, Some(6)).unwrap();
        assert_eq!(g, g2);
        let sc = read_graph_sidecar(&with_extension(&prefix, ".json")).unwrap();
        assert_eq!(sc.m, 9);
        assert_eq!(sc.scheme, Scheme::WithReplacement);

        // Writes are reproducible byte-for-byte.
        let bytes1 = fs::read(&csv_path).unwrap();
        write_graph(&prefix, &g, &GraphSidecar::from(&spec)).unwrap();
        let bytes2 = fs::read(&csv_path).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn score_and_decomposition_json_shapes() {
        let g = PairGraph::from_edges(3, [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (2, 0, 1.0, 1.0)])
            .unwrap();
        let d = hodge::hodge_decompose(&g).unwrap();
        let text = decomposition_json(&g, &d);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["gradient"]["0-1"].is_number());
        assert!((v["norms"]["curl"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(v["potential"].as_array().unwrap().len(), 3);

        let score = hodge::hodge_rank(&g).unwrap();
        let text = score_json(&score, 3.0, 1.0 / 3.0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["lambda2"].as_f64().unwrap(), 3.0);
        assert_eq!(v["scores"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn config_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let config = ExperimentConfig {
            n: 16,
            sampler_grid: vec![
                experiments::SchemeTemplate::new(Scheme::WithReplacement),
                experiments::SchemeTemplate {
                    scheme: Scheme::TwoStage,
                    transition_p0: Some(3.0),
                },
            ],
            p0_grid: vec![1.5, 2.0],
            trials: 10,
            outlier_percentage: 0.1,
            base_seed: 42,
            metric: experiments::Metric::L2Centered,
        };
        write_config_json(&path, &config).unwrap();
        let back = read_config_json(&path).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn csv_row_counts() {
        let cells = vec![CellResult {
            scheme: Scheme::Greedy,
            p0: 1.5,
            m: 32,
            mean_l2: 0.5,
            std_l2: 0.1,
            mean_lambda2: 2.0,
            mean_dmin: 3.0,
            connected_fraction: 1.0,
            trials_used: 10,
        }];
        let text = result_csv(&cells);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(RESULT_CSV_HEADER));
        assert!(text.contains("greedy,1.5,32,0.5,0.1,2,3,1,10"));
    }
}
