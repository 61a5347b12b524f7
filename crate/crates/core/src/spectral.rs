//! Fiedler value and vector of the graph Laplacian, the closed-form
//! Fiedler-value estimators for the two random sampling schemes, and the
//! concentration bounds they rest on.
//!
//! All logarithms here are natural logs; the connectivity multiple is
//! `p0 = 2m / ((n - 1) ln n)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::PairGraph;

/// Largest size at which the full dense symmetric eigendecomposition is used.
/// Above this the deflated Lanczos iteration takes over.
const DENSE_LIMIT: usize = 512;

/// Convergence tolerance of the iterative eigensolver, as a bound on
/// `||L psi - lambda2 psi|| / (1 + lambda2)`.
const LANCZOS_TOL: f64 = 1e-9;

/// Second-smallest eigenpair of a Laplacian plus the degree statistics the
/// estimators are phrased in.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    /// Fiedler value `lambda_2(L)` (algebraic connectivity). Zero iff the
    /// graph is disconnected.
    pub fiedler_value: f64,
    /// Unit-norm Fiedler vector, orthogonal to the constant vector. With a
    /// repeated eigenvalue any unit vector of the eigenspace is returned.
    pub fiedler_vector: DVector<f64>,
    /// Minimal weighted degree `d_min`.
    pub min_degree: f64,
    /// `lambda_2 / (2m/n)` where `m` is the total edge weight; 0 when the
    /// graph has no edges.
    pub normalized_lambda2: f64,
}

/// Fiedler value and vector of a pair graph. Requires `n >= 2`.
pub fn fiedler(graph: &PairGraph) -> Result<SpectralSummary> {
    let n = graph.vertex_count();
    if n < 2 {
        return Err(Error::Domain {
            op: "fiedler",
            reason: format!("need at least 2 vertices, got {n}"),
        });
    }
    let l = graph.laplacian();
    let (value, vector) = fiedler_pair(&l, None);
    let d = 2.0 * graph.total_weight() / n as f64;
    Ok(SpectralSummary {
        fiedler_value: value,
        fiedler_vector: vector,
        min_degree: graph.min_degree(),
        normalized_lambda2: if d > 0.0 { value / d } else { 0.0 },
    })
}

/// Second-smallest eigenpair of a Laplacian matrix. `warm_start` seeds the
/// iterative path; the dense path ignores it.
pub(crate) fn fiedler_pair(
    l: &DMatrix<f64>,
    warm_start: Option<&DVector<f64>>,
) -> (f64, DVector<f64>) {
    let n = l.nrows();
    debug_assert!(n >= 2);
    if n <= DENSE_LIMIT {
        return fiedler_pair_dense(l);
    }
    match fiedler_pair_lanczos(l, warm_start) {
        Some(pair) => pair,
        None => fiedler_pair_dense(l),
    }
}

/// Dense path: deflate the constant vector exactly by conjugating with the
/// Householder reflector that maps `1/sqrt(n)` to `e_0`, then take the
/// smallest eigenpair of the trailing (n-1) x (n-1) block.
fn fiedler_pair_dense(l: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let n = l.nrows();
    // v = e_0 - 1/sqrt(n); H = I - beta v v^T swaps e_0 and the unit constant.
    let mut v = DVector::from_element(n, -1.0 / (n as f64).sqrt());
    v[0] += 1.0;
    let beta = 2.0 / v.norm_squared();

    let lv = l * &v;
    let vlv = v.dot(&lv);
    // H L H = L - beta (v (Lv)^T + (Lv) v^T) + beta^2 (v^T L v) v v^T
    let mut hlh = l.clone();
    hlh.ger(-beta, &v, &lv, 1.0);
    hlh.ger(-beta, &lv, &v, 1.0);
    hlh.ger(beta * beta * vlv, &v, &v, 1.0);

    let m = hlh.view((1, 1), (n - 1, n - 1)).into_owned();
    let eig = SymmetricEigen::new(m);
    let mut best = 0;
    for k in 1..(n - 1) {
        if eig.eigenvalues[k] < eig.eigenvalues[best] {
            best = k;
        }
    }
    let lambda2 = eig.eigenvalues[best].max(0.0);

    // Map back: psi = H [0; y] = z - beta v (v . z).
    let mut z = DVector::zeros(n);
    z.rows_mut(1, n - 1)
        .copy_from(&eig.eigenvectors.column(best));
    let vz = v.dot(&z);
    let mut psi = z;
    psi.axpy(-beta * vz, &v, 1.0);
    let norm = psi.norm();
    if norm > 0.0 {
        psi /= norm;
    }
    (lambda2, psi)
}

/// Iterative path: Lanczos with full reorthogonalization on the shifted
/// operator `sigma I - L`, restricted to the subspace orthogonal to the
/// constant vector. The largest Ritz pair of the shifted operator is the
/// Fiedler pair of `L`. Returns `None` if convergence fails, in which case
/// the caller falls back to the dense path.
fn fiedler_pair_lanczos(
    l: &DMatrix<f64>,
    warm_start: Option<&DVector<f64>>,
) -> Option<(f64, DVector<f64>)> {
    let n = l.nrows();
    // Gershgorin upper bound: lambda_max <= 2 max_i L_ii.
    let sigma = 2.0 * (0..n).map(|i| l[(i, i)]).fold(0.0, f64::max) + 1.0;

    let center = |v: &mut DVector<f64>| {
        let mean = v.sum() / n as f64;
        v.add_scalar_mut(-mean);
    };

    let mut q0 = match warm_start {
        Some(w) if w.len() == n => w.clone(),
        _ => {
            // Fixed internal stream: the solver must be a pure function of L.
            let mut r = crate::rng::stream(0x360d_9e06_42ad_9e06, &[n as u64]);
            DVector::from_fn(n, |_, _| rand::Rng::gen_range(&mut r, -1.0..1.0))
        }
    };

    const BLOCK: usize = 96;
    const RESTARTS: usize = 40;
    for _ in 0..RESTARTS {
        center(&mut q0);
        let norm = q0.norm();
        if norm < 1e-300 {
            return None;
        }
        q0 /= norm;

        let mut basis: Vec<DVector<f64>> = vec![q0.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let steps = BLOCK.min(n - 2);

        for j in 0..steps {
            let qj = basis[j].clone();
            let mut w = &qj * sigma - l * &qj;
            let alpha = qj.dot(&w);
            alphas.push(alpha);
            w.axpy(-alpha, &qj, 1.0);
            if j > 0 {
                let prev = basis[j - 1].clone();
                w.axpy(-betas[j - 1], &prev, 1.0);
            }
            // Full reorthogonalization (twice) against the basis and the
            // constant vector; keeps the Krylov space clean over many steps.
            for _ in 0..2 {
                center(&mut w);
                for q in &basis {
                    let c = q.dot(&w);
                    w.axpy(-c, q, 1.0);
                }
            }
            let beta = w.norm();
            if beta < 1e-13 {
                break;
            }
            betas.push(beta);
            basis.push(&w / beta);
        }

        let k = alphas.len();
        if k == 0 {
            return None;
        }
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut best = 0;
        for i in 1..k {
            if eig.eigenvalues[i] > eig.eigenvalues[best] {
                best = i;
            }
        }
        let theta = eig.eigenvalues[best];
        let y = eig.eigenvectors.column(best);
        let mut ritz = DVector::zeros(n);
        for (i, q) in basis.iter().take(k).enumerate() {
            ritz.axpy(y[i], q, 1.0);
        }
        center(&mut ritz);
        let norm = ritz.norm();
        if norm < 1e-300 {
            return None;
        }
        ritz /= norm;

        let lambda = (sigma - theta).max(0.0);
        let resid = (l * &ritz - &ritz * lambda).norm();
        if resid <= LANCZOS_TOL * (1.0 + lambda) {
            return Some((lambda, ritz));
        }
        q0 = ritz;
    }
    None
}

/// The edge-budget parameterizations used by the estimators: density
/// `p = m / C(n,2)`, connectivity multiple `p0 = 2m / ((n-1) ln n)`, and
/// expected degree `d = 2m/n`. The budget `m` is treated as a real number so
/// closed-form sweeps need not round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorInputs {
    pub n: usize,
    pub m: f64,
    pub p: f64,
    pub p0: f64,
    pub d: f64,
}

impl EstimatorInputs {
    /// Derive all parameterizations from an edge budget.
    pub fn from_budget(n: usize, m: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain {
                op: "estimator_inputs",
                reason: format!("need n >= 2, got {n}"),
            });
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Domain {
                op: "estimator_inputs",
                reason: format!("need a positive finite budget, got {m}"),
            });
        }
        let nf = n as f64;
        let pairs = nf * (nf - 1.0) / 2.0;
        Ok(Self {
            n,
            m,
            p: m / pairs,
            p0: 2.0 * m / ((nf - 1.0) * nf.ln()),
            d: 2.0 * m / nf,
        })
    }

    /// Derive the budget from a connectivity multiple: `m = p0 (n-1) ln(n) / 2`.
    pub fn from_p0(n: usize, p0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain {
                op: "estimator_inputs",
                reason: format!("need n >= 2, got {n}"),
            });
        }
        let nf = n as f64;
        Self::from_budget(n, p0 * (nf - 1.0) * nf.ln() / 2.0)
    }
}

/// Integer edge budget for a connectivity multiple, rounded up so the
/// requested multiple is never undershot.
pub fn budget_for_p0(n: usize, p0: f64) -> usize {
    let nf = n as f64;
    (p0 * (nf - 1.0) * nf.ln() / 2.0).ceil() as usize
}

/// Root `a(p0)` of `p0 - 1 = a p0 (1 - ln a)` on `(0, 1)`: the asymptotic
/// value of `lambda_2 / (2m/n)` for both random schemes. The residual of the
/// returned root is at most 1e-12. `p0 = 1` returns the boundary value 0;
/// `p0 < 1` (below the connectivity threshold) is a domain error.
pub fn solve_a(p0: f64) -> Result<f64> {
    if !(p0 >= 1.0) {
        return Err(Error::Domain {
            op: "solve_a",
            reason: format!("need p0 >= 1, got {p0}"),
        });
    }
    if p0 == 1.0 {
        return Ok(0.0);
    }
    let g = |a: f64| a * p0 * (1.0 - a.ln()) - (p0 - 1.0);
    // g is strictly increasing on (0, 1): g'(a) = -p0 ln(a) > 0. Bisection is
    // therefore globally convergent; a few Newton polish steps tighten the
    // residual below the 1e-12 contract.
    let mut lo = 1e-15;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..4 {
        let ga = g(a);
        if ga.abs() <= 1e-13 {
            break;
        }
        let da = ga / (-p0 * a.ln());
        let next = a - da;
        if next > 0.0 && next < 1.0 {
            a = next;
        } else {
            break;
        }
    }
    debug_assert!(g(a).abs() <= 1e-12);
    Ok(a)
}

/// Finite-size estimate of `lambda_2 / (2m/n)` under uniform sampling with
/// replacement: `a1(p0, n) = 1 - sqrt(2/p0) sqrt(1 - 2/n)`. May be negative
/// for small `p0`; returned as-is.
pub fn estimate_with_replacement(inputs: &EstimatorInputs) -> Result<f64> {
    if !(inputs.p0 > 0.0) {
        return Err(Error::Domain {
            op: "estimate_with_replacement",
            reason: format!("need p0 > 0, got {}", inputs.p0),
        });
    }
    let nf = inputs.n as f64;
    Ok(1.0 - (2.0 / inputs.p0).sqrt() * (1.0 - 2.0 / nf).sqrt())
}

/// Finite-size estimate of `lambda_2 / (2m/n)` under uniform sampling without
/// replacement: `a2(p0, n) = 1 - sqrt(2/p0) sqrt(1 - p)` with
/// `p = p0 ln(n) / n`. Budgets beyond the complete graph (`p > 1`) are a
/// domain error.
pub fn estimate_without_replacement(inputs: &EstimatorInputs) -> Result<f64> {
    if !(inputs.p0 > 0.0) {
        return Err(Error::Domain {
            op: "estimate_without_replacement",
            reason: format!("need p0 > 0, got {}", inputs.p0),
        });
    }
    if inputs.p > 1.0 + 1e-12 {
        return Err(Error::Domain {
            op: "estimate_without_replacement",
            reason: format!("edge density p = {} exceeds the complete graph", inputs.p),
        });
    }
    let p = inputs.p.min(1.0);
    Ok(1.0 - (2.0 / inputs.p0).sqrt() * (1.0 - p).sqrt())
}

/// Exponent function `H(a) = a - a ln(a) - 1` of the minimal-degree tail
/// bound. Zero at `a = 1` and strictly negative on `(0, 1)`.
pub fn entropy_h(a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain {
            op: "entropy_h",
            reason: format!("need 0 < a <= 1, got {a}"),
        });
    }
    Ok(a - a * a.ln() - 1.0)
}

/// Union-bound tail estimate for the minimal degree under sampling with
/// replacement: `P(d_min <= 2am/n) <= min(1, n exp((2m/n) H(a)))`.
pub fn min_degree_tail_bound(n: usize, m: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain {
            op: "min_degree_tail_bound",
            reason: format!("need 0 < a < 1, got {a}"),
        });
    }
    if !(m >= 1.0) {
        return Err(Error::Domain {
            op: "min_degree_tail_bound",
            reason: format!("need m >= 1, got {m}"),
        });
    }
    let h = entropy_h(a)?;
    let d = 2.0 * m / n as f64;
    Ok((n as f64 * (d * h).exp()).min(1.0))
}

/// Chernoff-Hoeffding bounds for the sample mean of `n_trials` iid variables
/// in `[0, 1]` with mean `mu`:
/// `P(mean <= k mu)` for `k < 1` and `P(mean >= k mu)` for `k > 1` are both
/// bounded by `exp(-n mu (k ln k - k + 1))`.
///
/// Returns `(lower_tail_bound, upper_tail_bound)`; the side not covered by
/// the given `k` is the vacuous bound 1. At `k = 1` the exponent vanishes and
/// both sides are 1.
pub fn chernoff_bounds(n_trials: usize, mu: f64, k: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain {
            op: "chernoff_bounds",
            reason: format!("need 0 < mu < 1, got {mu}"),
        });
    }
    if !(k > 0.0) {
        return Err(Error::Domain {
            op: "chernoff_bounds",
            reason: format!("need k > 0, got {k}"),
        });
    }
    let exponent = n_trials as f64 * mu * (k * k.ln() - k + 1.0);
    let bound = (-exponent).exp();
    if k < 1.0 {
        Ok((bound, 1.0))
    } else if k > 1.0 {
        Ok((1.0, bound))
    } else {
        Ok((1.0, 1.0))
    }
}
