//! Monte-Carlo harness: simulated ground truth, outlier contamination, the
//! centered L2 metric, seeded ensembles over (scheme, p0) grids, estimator
//! sweeps, and ingestion of real comparison datasets.
//!
//! Everything is a pure function of its config and seeds. Trials derive
//! independent streams from `(base_seed, cell, trial)` so they can run in any
//! order or in parallel; aggregation walks trials in index order, making the
//! results schedule-independent.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{ComparisonRecord, PairGraph};
use crate::hodge::{self, GlobalScore};
use crate::io;
use crate::rng::{self, tag};
use crate::sampling::{self, SamplerSpec, Scheme};
use crate::spectral;

/// Distance between an estimate and the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Mean-center both vectors, then take the Euclidean distance. The raw
    /// score scale is kept: with dichotomous data the estimate lives on a
    /// different scale than a [0,1] truth, so absolute levels are only
    /// comparable across schemes, not against the truth's units.
    #[default]
    L2Centered,
    /// As above, but first fit a least-squares scalar multiplier to the
    /// estimate. Useful for sensitivity analysis of the scale ambiguity.
    L2CenteredRescaled,
}

/// One sampler template of an ensemble grid: the scheme plus its scheme-level
/// parameters; `n`, `m`, and the per-trial seed are filled in by the harness.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SchemeTemplate {
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_p0: Option<f64>,
}

impl SchemeTemplate {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            transition_p0: None,
        }
    }
}

/// Declarative ensemble description.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub sampler_grid: Vec<SchemeTemplate>,
    pub p0_grid: Vec<f64>,
    pub trials: usize,
    /// Outlier percentage: the probability of independently flipping each
    /// binary comparison.
    pub outlier_percentage: f64,
    pub base_seed: u64,
    #[serde(default)]
    pub metric: Metric,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2, got {}", self.n)));
        }
        if self.trials < 1 {
            return Err(Error::InvalidInput("need at least 1 trial".to_string()));
        }
        if self.sampler_grid.is_empty() {
            return Err(Error::InvalidInput("empty sampler grid".to_string()));
        }
        if self.p0_grid.is_empty() {
            return Err(Error::InvalidInput("empty p0 grid".to_string()));
        }
        for &p0 in &self.p0_grid {
            if !(p0 >= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "p0 grid values must be >= 1 (connectivity threshold), got {p0}"
                )));
            }
        }
        if !(0.0..=0.5).contains(&self.outlier_percentage) {
            return Err(Error::InvalidInput(format!(
                "outlier percentage must lie in [0, 0.5], got {}",
                self.outlier_percentage
            )));
        }
        Ok(())
    }
}

/// Aggregate statistics of one (scheme, p0) cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellResult {
    pub scheme: Scheme,
    /// Requested connectivity multiple (the grid label).
    pub p0: f64,
    /// Effective edge budget after rounding up and, for simple-graph schemes,
    /// clamping to the complete graph.
    pub m: usize,
    pub mean_l2: f64,
    pub std_l2: f64,
    pub mean_lambda2: f64,
    pub mean_dmin: f64,
    pub connected_fraction: f64,
    /// Connected trials, i.e. the sample size behind the L2 statistics.
    pub trials_used: usize,
}

/// Ground-truth score vector, uniform on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub scores: Vec<f64>,
}

/// Draw `n` independent uniform `[0,1]` scores from the seeded stream. Exact
/// ties between entries are measure-zero and tolerated downstream.
pub fn generate_ground_truth(n: usize, seed: u64) -> GroundTruth {
    let mut r = rng::stream(seed, &[tag::TRUTH]);
    GroundTruth {
        scores: (0..n).map(|_| r.gen::<f64>()).collect(),
    }
}

/// Emit one dichotomous record per unit of edge weight: the sign of the true
/// score difference, independently flipped with probability
/// `outlier_percentage`. Multigraph weights produce that many independent
/// records.
pub fn generate_comparisons(
    truth: &GroundTruth,
    graph: &PairGraph,
    outlier_percentage: f64,
    seed: u64,
) -> Result<Vec<ComparisonRecord>> {
    if !(0.0..=0.5).contains(&outlier_percentage) {
        return Err(Error::Domain {
            op: "generate_comparisons",
            reason: format!("outlier percentage {outlier_percentage} outside [0, 0.5]"),
        });
    }
    if truth.scores.len() != graph.vertex_count() {
        return Err(Error::LengthMismatch {
            left: truth.scores.len(),
            right: graph.vertex_count(),
        });
    }
    let mut r = rng::stream(seed, &[tag::FLIP]);
    let mut records = Vec::new();
    for (i, j, e) in graph.edges() {
        let copies = e.weight.round();
        if (e.weight - copies).abs() > 1e-9 || copies < 1.0 {
            return Err(Error::InvalidInput(format!(
                "edge ({i}, {j}) has non-integer multiplicity {}",
                e.weight
            )));
        }
        let value = (truth.scores[i] - truth.scores[j]).signum();
        for _ in 0..copies as usize {
            let flipped = r.gen::<f64>() < outlier_percentage;
            records.push(ComparisonRecord::new(
                i,
                j,
                if flipped { -value } else { value },
            ));
        }
    }
    Ok(records)
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Euclidean distance between the mean-centered estimate and the
/// mean-centered truth. No scale normalization is applied.
pub fn l2_distance(estimate: &GlobalScore, truth: &GroundTruth) -> Result<f64> {
    metric_distance(estimate, truth, Metric::L2Centered)
}

/// Distance under the requested metric.
pub fn metric_distance(estimate: &GlobalScore, truth: &GroundTruth, metric: Metric) -> Result<f64> {
    if estimate.x.len() != truth.scores.len() {
        return Err(Error::LengthMismatch {
            left: estimate.x.len(),
            right: truth.scores.len(),
        });
    }
    let xc = centered(estimate.x.as_slice());
    let tc = centered(&truth.scores);
    let scale = match metric {
        Metric::L2Centered => 1.0,
        Metric::L2CenteredRescaled => {
            let xx: f64 = xc.iter().map(|v| v * v).sum();
            if xx > 0.0 {
                xc.iter().zip(&tc).map(|(a, b)| a * b).sum::<f64>() / xx
            } else {
                0.0
            }
        }
    };
    Ok(xc
        .iter()
        .zip(&tc)
        .map(|(a, b)| (scale * a - b) * (scale * a - b))
        .sum::<f64>()
        .sqrt())
}

/// Outcome of one ensemble trial.
struct TrialOutcome {
    l2: Option<f64>,
    lambda2: f64,
    dmin: f64,
    connected: bool,
}

/// Effective edge budget of one cell: round the multiple up, then clamp
/// simple-graph schemes to the complete graph so dense grid points degrade to
/// the exhaustive design instead of erroring.
fn effective_budget(n: usize, p0: f64, scheme: Scheme) -> usize {
    let m = spectral::budget_for_p0(n, p0);
    match scheme {
        Scheme::WithReplacement => m,
        _ => m.min(sampling::pair_count(n)),
    }
}

/// Run the full ensemble: `trials` independent runs for every (scheme, p0)
/// cell. Each run samples a graph, generates contaminated comparisons, solves
/// for the global score, and records the metric, the Fiedler value, the
/// minimal degree, and connectivity. Disconnected trials count toward
/// `connected_fraction` but are excluded from the L2 statistics; nothing is
/// redrawn.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    config.validate()?;
    let n = config.n;
    let mut cells = Vec::new();
    for (s_idx, template) in config.sampler_grid.iter().enumerate() {
        for (p_idx, &p0) in config.p0_grid.iter().enumerate() {
            let m = effective_budget(n, p0, template.scheme);
            let outcomes: Vec<TrialOutcome> = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, template, p0, m, s_idx, p_idx, t))
                .collect::<Result<Vec<_>>>()?;
            cells.push(aggregate(template.scheme, p0, m, &outcomes));
        }
    }
    Ok(cells)
}

fn run_trial(
    config: &ExperimentConfig,
    template: &SchemeTemplate,
    _p0: f64,
    m: usize,
    s_idx: usize,
    p_idx: usize,
    t: usize,
) -> Result<TrialOutcome> {
    let n = config.n;
    // The truth stream depends only on the trial index, so every cell sees
    // the same truth in trial t and scheme comparisons are paired.
    let truth = generate_ground_truth(n, rng::derive(config.base_seed, &[t as u64]));

    let mut spec = SamplerSpec::new(
        template.scheme,
        n,
        m,
        rng::derive(
            config.base_seed,
            &[tag::SAMPLER, s_idx as u64, p_idx as u64, t as u64],
        ),
    );
    spec.transition_p0 = template.transition_p0;
    let graph = sampling::sample(&spec)?;

    let records = generate_comparisons(
        &truth,
        &graph,
        config.outlier_percentage,
        rng::derive(
            config.base_seed,
            &[tag::FLIP, s_idx as u64, p_idx as u64, t as u64],
        ),
    )?;
    let data = PairGraph::from_records(n, &records)?;

    let summary = spectral::fiedler(&data)?;
    let connected = data.is_connected();
    let l2 = if connected {
        let score = hodge::hodge_rank(&data)?;
        Some(metric_distance(&score, &truth, config.metric)?)
    } else {
        None
    };
    Ok(TrialOutcome {
        l2,
        lambda2: summary.fiedler_value,
        dmin: summary.min_degree,
        connected,
    })
}

fn aggregate(scheme: Scheme, p0: f64, m: usize, outcomes: &[TrialOutcome]) -> CellResult {
    let trials = outcomes.len();
    let used: Vec<f64> = outcomes.iter().filter_map(|o| o.l2).collect();
    let trials_used = used.len();
    let mean_l2 = if trials_used > 0 {
        used.iter().sum::<f64>() / trials_used as f64
    } else {
        0.0
    };
    let std_l2 = if trials_used > 1 {
        let ss: f64 = used.iter().map(|v| (v - mean_l2) * (v - mean_l2)).sum();
        (ss / (trials_used as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    CellResult {
        scheme,
        p0,
        m,
        mean_l2,
        std_l2,
        mean_lambda2: outcomes.iter().map(|o| o.lambda2).sum::<f64>() / trials as f64,
        mean_dmin: outcomes.iter().map(|o| o.dmin).sum::<f64>() / trials as f64,
        connected_fraction: outcomes.iter().filter(|o| o.connected).count() as f64 / trials as f64,
        trials_used,
    }
}

/// One row of an estimator sweep: measured normalized spectra next to the
/// three closed-form estimates, with the estimator inputs taken from the
/// effective budget.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub n: usize,
    pub m: usize,
    /// Requested connectivity multiple (the grid label).
    pub p0: f64,
    pub lambda2_over_d: f64,
    pub dmin_over_d: f64,
    pub a1: f64,
    pub a2: f64,
    pub a_theorem1: f64,
}

/// Sweep the Fiedler value and minimal degree (both normalized by the
/// expected degree `2m/n`) over a p0 grid for the given schemes, averaging
/// over `trials` seeded samples per point.
pub fn fiedler_sweep(
    n: usize,
    p0_grid: &[f64],
    trials: usize,
    seed: u64,
    schemes: &[Scheme],
) -> Result<Vec<SweepRow>> {
    if trials < 1 {
        return Err(Error::InvalidInput("need at least 1 trial".to_string()));
    }
    for &p0 in p0_grid {
        if !(p0 >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "sweep p0 values must be >= 1, got {p0}"
            )));
        }
    }
    let mut rows = Vec::new();
    for (s_idx, &scheme) in schemes.iter().enumerate() {
        if scheme == Scheme::TwoStage {
            return Err(Error::InvalidInput(
                "two_stage is not part of estimator sweeps".to_string(),
            ));
        }
        for (p_idx, &p0) in p0_grid.iter().enumerate() {
            let m = effective_budget(n, p0, scheme);
            let samples: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<(f64, f64)> {
                    let spec = SamplerSpec::new(
                        scheme,
                        n,
                        m,
                        rng::derive(seed, &[tag::SWEEP, s_idx as u64, p_idx as u64, t as u64]),
                    );
                    let g = sampling::sample(&spec)?;
                    let s = spectral::fiedler(&g)?;
                    let d = 2.0 * g.total_weight() / n as f64;
                    Ok((s.fiedler_value / d, s.min_degree / d))
                })
                .collect::<Result<Vec<_>>>()?;
            let lambda2_over_d = samples.iter().map(|s| s.0).sum::<f64>() / trials as f64;
            let dmin_over_d = samples.iter().map(|s| s.1).sum::<f64>() / trials as f64;

            let inputs = spectral::EstimatorInputs::from_budget(n, m as f64)?;
            // The without-replacement estimate only exists up to the complete
            // graph, so its column always uses the clamped budget.
            let simple_m = m.min(sampling::pair_count(n)) as f64;
            let simple_inputs = spectral::EstimatorInputs::from_budget(n, simple_m)?;
            rows.push(SweepRow {
                scheme,
                n,
                m,
                p0,
                lambda2_over_d,
                dmin_over_d,
                a1: spectral::estimate_with_replacement(&inputs)?,
                a2: spectral::estimate_without_replacement(&simple_inputs)?,
                a_theorem1: spectral::solve_a(inputs.p0.max(1.0))?,
            });
        }
    }
    Ok(rows)
}

/// Ingest a comparison-record CSV, aggregate the full graph, and rank it. The
/// full-data score is the reference truth for subsequent subsample runs.
/// Errors if the aggregated graph is disconnected.
pub fn ingest_dataset(path: &Path, n: usize) -> Result<(PairGraph, GlobalScore)> {
    let records = io::read_records_csv(path)?;
    let graph = PairGraph::from_records(n, &records)?;
    graph.require_connected()?;
    let score = hodge::hodge_rank(&graph)?;
    Ok((graph, score))
}

/// Subsample raw records under a sampling scheme: the scheme selects pairs
/// from the distinct pairs present in `records`, and each selection
/// contributes one uniformly chosen record for that pair.
pub fn subsample_records(
    records: &[ComparisonRecord],
    scheme: Scheme,
    m: usize,
    seed: u64,
) -> Result<Vec<ComparisonRecord>> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to subsample".to_string()));
    }
    if m < 1 {
        return Err(Error::InvalidInput("need at least 1 selection".to_string()));
    }
    let n = records.iter().map(|r| r.i.max(r.j) + 1).max().unwrap_or(0);
    let mut pools: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (idx, r) in records.iter().enumerate() {
        let key = (r.i.min(r.j), r.i.max(r.j));
        pools.entry(key).or_default().push(idx);
    }
    let pairs: Vec<(usize, usize)> = pools.keys().copied().collect();
    let mut r = rng::stream(seed, &[tag::SUBSAMPLE]);

    let pick = |pair: (usize, usize), r: &mut rand_chacha::ChaCha8Rng| -> ComparisonRecord {
        let pool = &pools[&pair];
        records[pool[r.gen_range(0..pool.len())]].clone()
    };

    match scheme {
        Scheme::WithReplacement => Ok((0..m)
            .map(|_| {
                let pair = pairs[r.gen_range(0..pairs.len())];
                pick(pair, &mut r)
            })
            .collect()),
        Scheme::WithoutReplacement => {
            if m > pairs.len() {
                return Err(Error::Budget {
                    scheme: "without_replacement",
                    n,
                    m,
                    reason: format!("only {} distinct pairs available", pairs.len()),
                });
            }
            let mut chosen: Vec<usize> = Vec::new();
            // Floyd over the available-pair indices.
            for v in (pairs.len() - m)..pairs.len() {
                let t = r.gen_range(0..=v);
                if chosen.contains(&t) {
                    chosen.push(v);
                } else {
                    chosen.push(t);
                }
            }
            chosen.sort_unstable();
            Ok(chosen.into_iter().map(|k| pick(pairs[k], &mut r)).collect())
        }
        Scheme::Greedy => {
            let set: std::collections::BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
            let (edges, _) = sampling::greedy_over(n, Some(&set), m, &mut r)?;
            Ok(edges.into_iter().map(|pair| pick(pair, &mut r)).collect())
        }
        Scheme::TwoStage => Err(Error::InvalidInput(
            "two_stage subsampling is not defined for record pools".to_string(),
        )),
    }
}
