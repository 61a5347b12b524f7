//! Ranking and sampling laboratory for pairwise-comparison data.
//!
//! Pairwise judgments are aggregated onto a weighted graph; a global score is
//! recovered by least squares on that graph (HodgeRank, `Lx = div(Y)`), and the
//! residual is split into local (curl) and global (harmonic) inconsistency via
//! the combinatorial Hodge decomposition. The stability of the estimate is
//! governed by the Fiedler value of the graph Laplacian, so the crate also
//! ships three edge-sampling schemes (uniform with replacement, uniform
//! without replacement, greedy Fiedler-vector sampling), closed-form
//! Fiedler-value estimators for the two random schemes, and a seeded
//! Monte-Carlo harness that compares them.
//!
//! Modules map one-to-one onto the pipeline:
//!
//! - [`graph`]: comparison records, the weighted pair graph, Laplacian,
//!   divergence, triangles.
//! - [`hodge`]: the global score, the gradient/harmonic/curl decomposition,
//!   and the `1/lambda_2` sensitivity certificate.
//! - [`spectral`]: Fiedler pairs (dense and iterative), the `a(p0)` root, the
//!   `a1`/`a2` estimators, and Chernoff-style tail bounds.
//! - [`sampling`]: the three schemes plus a two-stage hybrid, all
//!   deterministic under a supplied seed.
//! - [`experiments`]: ground-truth simulation, outlier contamination, the
//!   centered L2 metric, ensembles, estimator sweeps, dataset ingestion.
//! - [`io`]: the CSV/JSON file formats shared by the CLI.

// Negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod graph;
pub mod hodge;
pub mod io;
pub mod rng;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{ComparisonRecord, EdgeFlow, PairGraph, TriangleSet};
pub use hodge::{GlobalScore, HodgeDecomposition};
pub use sampling::{SamplerSpec, Scheme};
pub use spectral::{EstimatorInputs, SpectralSummary};
