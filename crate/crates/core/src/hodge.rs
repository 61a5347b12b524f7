//! Global scoring by least squares on the pair graph and the three-way
//! orthogonal decomposition of the mean flow.
//!
//! The score solves the normal equation `L x = div(Y)` on the subspace
//! orthogonal to the constant vector. The mean flow then splits into a
//! gradient part (the score's potential differences), a curl part supported
//! on triangles (local inconsistency), and a harmonic remainder that is both
//! divergence-free and curl-free (global inconsistency); the three parts are
//! mutually orthogonal in the weight-induced inner product.

use nalgebra::{Cholesky, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{EdgeFlow, PairGraph, TriangleSet};
use crate::spectral;

/// Relative residual the normal-equation solve is refined to.
const SOLVE_TOL: f64 = 1e-10;

/// Relative tolerance of the curl least-squares subproblem. Two orders
/// tighter than the 1e-8 acceptance checks on the decomposition.
const CURL_TOL: f64 = 1e-12;

/// Global rating vector. Centered so the entries sum to zero, which is the
/// unique least-squares representative on a connected graph.
#[derive(Debug, Clone)]
pub struct GlobalScore {
    pub x: DVector<f64>,
    /// Final `||L x - b||` of the solve.
    pub residual_norm: f64,
    /// Set once the zero-sum constraint has been enforced.
    pub centered: bool,
}

/// The mean flow split into its gradient, harmonic, and curl parts, plus the
/// potential that generates the gradient part.
#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    pub gradient: EdgeFlow,
    pub harmonic: EdgeFlow,
    pub curl: EdgeFlow,
    pub potential: GlobalScore,
}

impl HodgeDecomposition {
    /// Weighted norms of the three components, in (gradient, harmonic, curl)
    /// order.
    pub fn component_norms(&self, graph: &PairGraph) -> (f64, f64, f64) {
        (
            self.gradient.weighted_norm(graph),
            self.harmonic.weighted_norm(graph),
            self.curl.weighted_norm(graph),
        )
    }
}

/// Solve `L y = rhs` in the minimal-norm least-squares sense on a connected
/// graph: factor the rank-one shift `L + (1/n) 1 1^T` (positive definite, and
/// identical to `L` on the zero-sum subspace), solve, center, and refine
/// until the relative residual is within tolerance.
pub fn solve_normal_equation(graph: &PairGraph, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    graph.require_connected()?;
    let n = graph.vertex_count();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            left: rhs.len(),
            right: n,
        });
    }
    let l = graph.laplacian();
    let nf = n as f64;
    let mut shifted = l.clone();
    let ones = DVector::from_element(n, 1.0);
    shifted.ger(1.0 / nf, &ones, &ones, 1.0);

    let center = |v: &mut DVector<f64>| {
        let mean = v.sum() / nf;
        v.add_scalar_mut(-mean);
    };

    let chol = Cholesky::new(shifted.clone());
    let solve_one = |r: &DVector<f64>| -> DVector<f64> {
        match &chol {
            Some(c) => c.solve(r),
            None => {
                // Severely ill-conditioned factorization: fall back to the
                // eigendecomposition pseudo-inverse of the shifted matrix.
                let eig = SymmetricEigen::new(shifted.clone());
                let mut y = DVector::zeros(n);
                for k in 0..n {
                    let lambda = eig.eigenvalues[k];
                    if lambda.abs() > 1e-14 {
                        let q = eig.eigenvectors.column(k);
                        y.axpy(q.dot(r) / lambda, &q.into_owned(), 1.0);
                    }
                }
                y
            }
        }
    };

    let scale = rhs.norm().max(1.0);
    let mut x = solve_one(rhs);
    center(&mut x);
    for _ in 0..3 {
        let residual = rhs - &l * &x;
        if residual.norm() <= SOLVE_TOL * scale {
            break;
        }
        let mut dx = solve_one(&residual);
        center(&mut dx);
        x += dx;
    }
    Ok(x)
}

/// Global rating of a connected pair graph: the minimal-norm least-squares
/// solution of `L x = div(Y)`, centered to the zero-sum subspace.
///
/// A disconnected graph is an error carrying per-vertex component labels so
/// callers can rank each component separately if they choose.
pub fn hodge_rank(graph: &PairGraph) -> Result<GlobalScore> {
    let b = graph.divergence();
    let x = solve_normal_equation(graph, &b)?;
    let residual_norm = (graph.laplacian() * &x - &b).norm();
    Ok(GlobalScore {
        x,
        residual_norm,
        centered: true,
    })
}

/// Sensitivity certificate `1 / lambda_2(L)` of the global score against
/// perturbations of the divergence data. Errors on a disconnected graph,
/// where `lambda_2 = 0` and the certificate is infinite.
pub fn sensitivity(graph: &PairGraph) -> Result<f64> {
    graph.require_connected()?;
    let summary = spectral::fiedler(graph)?;
    Ok(1.0 / summary.fiedler_value)
}

/// Orthogonal decomposition of the mean flow on a connected graph.
///
/// The gradient part is the potential difference of [`hodge_rank`]'s score;
/// the curl part is the weighted projection of the residual onto flows
/// generated by triangle potentials (least squares over the triangle set,
/// unit triangle weights); the harmonic part is what remains.
pub fn hodge_decompose(graph: &PairGraph) -> Result<HodgeDecomposition> {
    let potential = hodge_rank(graph)?;
    let gradient = EdgeFlow::gradient_of(graph, &potential.x);
    let residual = graph.mean_flow().axpy(-1.0, &gradient);

    let triangles = graph.triangles();
    let curl = if triangles.is_empty() {
        EdgeFlow::zero_on(graph)
    } else {
        project_onto_curl_space(graph, &triangles, &residual)
    };
    let harmonic = residual.axpy(-1.0, &curl);

    Ok(HodgeDecomposition {
        gradient,
        harmonic,
        curl,
        potential,
    })
}

/// Apply the adjoint of the triangle-trace operator: triangle potentials to
/// an edge flow, `(C* phi)_e = (1/w_e) sum_{T owning e} sign(e, T) phi_T`.
fn curl_adjoint(graph: &PairGraph, triangles: &TriangleSet, phi: &[f64]) -> EdgeFlow {
    let mut flow = EdgeFlow::zero_on(graph);
    for (t, (i, j, k)) in triangles.iter().enumerate() {
        let p = phi[t];
        // Oriented cycle i -> j -> k -> i; edge (i, k) is traversed k -> i.
        for (a, b, sign) in [(i, j, 1.0), (j, k, 1.0), (i, k, -1.0)] {
            let w = graph.edge(a, b).expect("triangle edge must exist").weight;
            *flow.values.get_mut(&(a, b)).expect("edge present") += sign * p / w;
        }
    }
    flow
}

/// Apply the triangle-trace operator: cycle sums of a flow over every
/// triangle.
fn curl_trace(triangles: &TriangleSet, flow: &EdgeFlow) -> Vec<f64> {
    (0..triangles.len())
        .map(|t| triangles.cycle_sum(t, flow))
        .collect()
}

/// Weighted projection of `residual` onto the image of the curl adjoint,
/// computed by conjugate gradients on the triangle-space normal equations
/// `(C C*) phi = C r`. The system is consistent by construction, so CG on the
/// positive semidefinite operator converges without regularization.
fn project_onto_curl_space(
    graph: &PairGraph,
    triangles: &TriangleSet,
    residual: &EdgeFlow,
) -> EdgeFlow {
    let apply =
        |phi: &[f64]| -> Vec<f64> { curl_trace(triangles, &curl_adjoint(graph, triangles, phi)) };

    let b = curl_trace(triangles, residual);
    let nt = triangles.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return EdgeFlow::zero_on(graph);
    }

    let mut phi = vec![0.0; nt];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = bnorm * bnorm;
    let max_iters = 10 * nt + 200;
    for _ in 0..max_iters {
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rs / pap;
        for t in 0..nt {
            phi[t] += alpha * p[t];
            r[t] -= alpha * ap[t];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if rs_new.sqrt() <= CURL_TOL * bnorm {
            break;
        }
        let beta = rs_new / rs;
        for t in 0..nt {
            p[t] = r[t] + beta * p[t];
        }
        rs = rs_new;
    }
    curl_adjoint(graph, triangles, &phi)
}
