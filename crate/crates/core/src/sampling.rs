//! Edge-sampling schemes for building comparison graphs under a fixed budget:
//! uniform with replacement (a weighted multigraph), uniform without
//! replacement (an Erdős–Rényi draw), greedy Fiedler-vector sampling, and a
//! two-stage hybrid that starts greedy and finishes with uniform sampling
//! without replacement.
//!
//! Every sampler is a pure function of its [`SamplerSpec`]: identical specs
//! produce identical graphs.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::PairGraph;
use crate::rng::{self, tag};
use crate::spectral;

/// The four sampling schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    WithReplacement,
    WithoutReplacement,
    Greedy,
    TwoStage,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::WithReplacement => "with_replacement",
            Scheme::WithoutReplacement => "without_replacement",
            Scheme::Greedy => "greedy",
            Scheme::TwoStage => "two_stage",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with" | "with_replacement" | "with-replacement" => Ok(Scheme::WithReplacement),
            "without" | "without_replacement" | "without-replacement" => {
                Ok(Scheme::WithoutReplacement)
            }
            "greedy" => Ok(Scheme::Greedy),
            "two-stage" | "two_stage" => Ok(Scheme::TwoStage),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Declarative description of one sampling run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplerSpec {
    pub scheme: Scheme,
    pub n: usize,
    /// Edge budget: number of draws (with replacement) or distinct edges.
    pub m: usize,
    pub seed: u64,
    /// Connectivity multiple at which a two-stage run switches from greedy to
    /// uniform sampling; required (and only meaningful) for that scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_p0: Option<f64>,
}

impl SamplerSpec {
    pub fn new(scheme: Scheme, n: usize, m: usize, seed: u64) -> Self {
        Self {
            scheme,
            n,
            m,
            seed,
            transition_p0: None,
        }
    }

    pub fn with_transition(mut self, p0: f64) -> Self {
        self.transition_p0 = Some(p0);
        self
    }

    fn validate(&self) -> Result<()> {
        let budget_err = |reason: &str| Error::Budget {
            scheme: match self.scheme {
                Scheme::WithReplacement => "with_replacement",
                Scheme::WithoutReplacement => "without_replacement",
                Scheme::Greedy => "greedy",
                Scheme::TwoStage => "two_stage",
            },
            n: self.n,
            m: self.m,
            reason: reason.to_string(),
        };
        if self.n < 2 {
            return Err(budget_err("need at least 2 vertices"));
        }
        if self.m < 1 {
            return Err(budget_err("need at least 1 edge"));
        }
        let pairs = pair_count(self.n);
        match self.scheme {
            Scheme::WithReplacement => {}
            Scheme::WithoutReplacement => {
                if self.m > pairs {
                    return Err(budget_err("budget exceeds the complete graph"));
                }
            }
            Scheme::Greedy => {
                if self.m > pairs {
                    return Err(budget_err("budget exceeds the complete graph"));
                }
                if self.m < self.n - 1 {
                    return Err(budget_err(
                        "greedy needs m >= n - 1 for a connected bootstrap",
                    ));
                }
            }
            Scheme::TwoStage => {
                if self.m > pairs {
                    return Err(budget_err("budget exceeds the complete graph"));
                }
                match self.transition_p0 {
                    Some(p0) if p0 >= 1.0 => {}
                    Some(p0) => {
                        return Err(Error::InvalidInput(format!(
                            "two_stage transition_p0 must be >= 1, got {p0}"
                        )))
                    }
                    None => {
                        return Err(Error::InvalidInput(
                            "two_stage requires transition_p0".to_string(),
                        ))
                    }
                }
            }
        }
        Ok(())
    }
}

/// Run the scheme named by the spec.
pub fn sample(spec: &SamplerSpec) -> Result<PairGraph> {
    match spec.scheme {
        Scheme::WithReplacement => sample_with_replacement(spec),
        Scheme::WithoutReplacement => sample_without_replacement(spec),
        Scheme::Greedy => sample_greedy(spec),
        Scheme::TwoStage => sample_two_stage(spec),
    }
}

pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Lexicographic index of the pair `(i, j)`, `i < j`, among all pairs on `n`
/// vertices.
pub fn pair_rank(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_rank`].
fn pair_unrank(n: usize, idx: usize) -> (usize, usize) {
    // Solve for the row from the closed form, then fix rounding drift.
    let nf = n as f64;
    let mut i = (nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * idx as f64).max(0.0).sqrt()) as usize;
    i = i.min(n - 2);
    while pair_rank(n, i, i + 1) > idx {
        i -= 1;
    }
    while i + 1 < n - 1 && pair_rank(n, i + 1, i + 2) <= idx {
        i += 1;
    }
    let j = i + 1 + (idx - pair_rank(n, i, i + 1));
    (i, j)
}

/// `m` independent uniform draws over the unordered pairs; edge weights are
/// the draw multiplicities, so the total weight is exactly `m`.
pub fn sample_with_replacement(spec: &SamplerSpec) -> Result<PairGraph> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, &[tag::SAMPLER]);
    let total = pair_count(spec.n);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..spec.m {
        *counts.entry(r.gen_range(0..total)).or_insert(0) += 1;
    }
    PairGraph::from_edges(
        spec.n,
        counts.into_iter().map(|(idx, c)| {
            let (i, j) = pair_unrank(spec.n, idx);
            (i, j, c as f64, 0.0)
        }),
    )
}

/// A uniformly random `m`-subset of the pairs (Floyd's algorithm over pair
/// ranks), i.e. one draw of the Erdős–Rényi model `G(n, m)`.
pub fn sample_without_replacement(spec: &SamplerSpec) -> Result<PairGraph> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, &[tag::SAMPLER]);
    let total = pair_count(spec.n);
    let chosen = floyd_subset(total, spec.m, &mut r);
    PairGraph::from_edges(
        spec.n,
        chosen.into_iter().map(|idx| {
            let (i, j) = pair_unrank(spec.n, idx);
            (i, j, 1.0, 0.0)
        }),
    )
}

/// Floyd's uniform `m`-subset of `{0, .., total-1}`.
fn floyd_subset(total: usize, m: usize, r: &mut ChaCha8Rng) -> BTreeSet<usize> {
    debug_assert!(m <= total);
    let mut chosen = BTreeSet::new();
    for v in (total - m)..total {
        let t = r.gen_range(0..=v);
        if !chosen.insert(t) {
            chosen.insert(v);
        }
    }
    chosen
}

/// Greedy Fiedler-vector sampling: bootstrap with a uniformly random spanning
/// tree, then repeatedly add the absent edge maximizing `(psi_i - psi_j)^2`
/// where `psi` is the current Fiedler vector, until `m` edges are present.
/// Ties break toward the lexicographically smallest pair.
pub fn sample_greedy(spec: &SamplerSpec) -> Result<PairGraph> {
    Ok(sample_greedy_trace(spec)?.0)
}

/// As [`sample_greedy`], additionally returning the Fiedler value after the
/// bootstrap tree and after each greedy addition. The trace is non-decreasing
/// since each addition adds a positive-semidefinite term to the Laplacian.
pub fn sample_greedy_trace(spec: &SamplerSpec) -> Result<(PairGraph, Vec<f64>)> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, &[tag::SAMPLER]);
    let (edges, trace) = greedy_over(spec.n, None, spec.m, &mut r)?;
    let g = PairGraph::from_topology(spec.n, edges)?;
    Ok((g, trace))
}

/// Greedy sampling up to the transition budget
/// `m1 = min(m, ceil(transition_p0 (n-1) ln(n) / 2))`, then uniform sampling
/// without replacement over the remaining absent pairs up to `m` edges.
pub fn sample_two_stage(spec: &SamplerSpec) -> Result<PairGraph> {
    spec.validate()?;
    let p0 = spec.transition_p0.expect("validated");
    let m1 = spec.m.min(spectral::budget_for_p0(spec.n, p0));
    let mut r = rng::stream(spec.seed, &[tag::SAMPLER]);
    let (mut edges, _) = greedy_over(spec.n, None, m1, &mut r)?;

    if m1 < spec.m {
        let have: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
        let absent: Vec<(usize, usize)> = (0..pair_count(spec.n))
            .map(|idx| pair_unrank(spec.n, idx))
            .filter(|p| !have.contains(p))
            .collect();
        let extra = floyd_subset(absent.len(), spec.m - m1, &mut r);
        edges.extend(extra.into_iter().map(|k| absent[k]));
    }
    PairGraph::from_topology(spec.n, edges)
}

/// Edge list of a greedy run together with its Fiedler-value trace.
type GreedyRun = (Vec<(usize, usize)>, Vec<f64>);

/// Greedy core shared by the samplers and by record subsampling. `candidates`
/// restricts the universe of allowed pairs (`None` means every pair). Returns
/// the edge list and the Fiedler-value trace.
pub(crate) fn greedy_over(
    n: usize,
    candidates: Option<&BTreeSet<(usize, usize)>>,
    m: usize,
    r: &mut ChaCha8Rng,
) -> Result<GreedyRun> {
    if m < n - 1 {
        return Err(Error::Budget {
            scheme: "greedy",
            n,
            m,
            reason: "greedy needs m >= n - 1 for a connected bootstrap".to_string(),
        });
    }
    if let Some(set) = candidates {
        if set.len() < m {
            return Err(Error::Budget {
                scheme: "greedy",
                n,
                m,
                reason: format!("only {} candidate pairs available", set.len()),
            });
        }
    }
    let tree = wilson_spanning_tree(n, candidates, r)?;
    debug_assert_eq!(tree.len(), n - 1);

    let mut present = vec![false; n * n];
    let mut l = DMatrix::zeros(n, n);
    let mut edges = Vec::with_capacity(m);
    let add = |l: &mut DMatrix<f64>, present: &mut Vec<bool>, i: usize, j: usize| {
        present[i * n + j] = true;
        present[j * n + i] = true;
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    };
    for &(i, j) in &tree {
        add(&mut l, &mut present, i, j);
        edges.push((i, j));
    }

    let (mut lambda, mut psi) = spectral::fiedler_pair(&l, None);
    let mut trace = vec![lambda];
    while edges.len() < m {
        let best = best_absent_pair(n, &present, &psi, candidates);
        let (i, j) = best.expect("budget validated against candidate count");
        add(&mut l, &mut present, i, j);
        edges.push((i, j));
        let (lam, vec) = spectral::fiedler_pair(&l, Some(&psi));
        lambda = lam;
        psi = vec;
        trace.push(lambda);
    }
    edges.sort_unstable();
    Ok((edges, trace))
}

/// Scan absent pairs in lexicographic order keeping the first maximizer of
/// `(psi_i - psi_j)^2`, which implements the lexicographic tie-break. Scores
/// within a relative margin of the incumbent count as ties, so eigensolver
/// rounding cannot flip the selection between equally good pairs.
fn best_absent_pair(
    n: usize,
    present: &[bool],
    psi: &DVector<f64>,
    candidates: Option<&BTreeSet<(usize, usize)>>,
) -> Option<(usize, usize)> {
    const TIE_MARGIN: f64 = 1e-12;
    let mut best: Option<((usize, usize), f64)> = None;
    let mut consider = |i: usize, j: usize| {
        if present[i * n + j] {
            return;
        }
        let gap = (psi[i] - psi[j]) * (psi[i] - psi[j]);
        match &best {
            Some((_, b)) if gap <= b * (1.0 + TIE_MARGIN) => {}
            _ => best = Some(((i, j), gap)),
        }
    };
    match candidates {
        Some(set) => {
            for &(i, j) in set {
                consider(i, j);
            }
        }
        None => {
            for i in 0..n {
                for j in (i + 1)..n {
                    consider(i, j);
                }
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Uniformly random spanning tree by Wilson's loop-erased random walks,
/// rooted at vertex 0. `candidates = None` walks on the complete graph;
/// otherwise the walk is restricted to the candidate pairs, which must form a
/// connected spanning subgraph.
fn wilson_spanning_tree(
    n: usize,
    candidates: Option<&BTreeSet<(usize, usize)>>,
    r: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    let adjacency: Option<Vec<Vec<usize>>> = candidates.map(|set| {
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in set {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    });
    if let Some(adj) = &adjacency {
        // The walk never terminates on a disconnected candidate graph.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        if count < n {
            return Err(Error::InvalidInput(
                "candidate pairs do not form a connected spanning subgraph".to_string(),
            ));
        }
    }

    let step = |u: usize, r: &mut ChaCha8Rng| -> usize {
        match &adjacency {
            Some(adj) => adj[u][r.gen_range(0..adj[u].len())],
            None => {
                let v = r.gen_range(0..n - 1);
                if v >= u {
                    v + 1
                } else {
                    v
                }
            }
        }
    };

    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[0] = true;
    for start in 1..n {
        let mut u = start;
        while !in_tree[u] {
            next[u] = step(u, r);
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    Ok((1..n)
        .map(|v| {
            let u = next[v];
            (v.min(u), v.max(u))
        })
        .collect())
}
