//! C ABI for the ranking and sampling library.
//!
//! Graphs are opaque handles created by the `hl_graph_*` constructors and
//! released with [`hl_graph_free`]. Every fallible call returns an
//! [`HlStatus`] code and writes its result through out-pointers; the message
//! of the most recent error on the calling thread is available via
//! [`hl_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hodgelab::{experiments, hodge, io, sampling, spectral};
use hodgelab::{Error, PairGraph, SamplerSpec, Scheme};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Disconnected = 3,
    DomainError = 4,
    BudgetError = 5,
    ParseError = 6,
    IoError = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Sampling scheme selector for [`hl_graph_sample`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlScheme {
    WithReplacement = 0,
    WithoutReplacement = 1,
    Greedy = 2,
    TwoStage = 3,
}

impl From<HlScheme> for Scheme {
    fn from(s: HlScheme) -> Scheme {
        match s {
            HlScheme::WithReplacement => Scheme::WithReplacement,
            HlScheme::WithoutReplacement => Scheme::WithoutReplacement,
            HlScheme::Greedy => Scheme::Greedy,
            HlScheme::TwoStage => Scheme::TwoStage,
        }
    }
}

/// Opaque graph handle.
pub struct HlGraph {
    inner: PairGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HlStatus {
    match err {
        Error::Disconnected { .. } => HlStatus::Disconnected,
        Error::Domain { .. } => HlStatus::DomainError,
        Error::Budget { .. } => HlStatus::BudgetError,
        Error::Parse { .. } => HlStatus::ParseError,
        Error::Io(_) => HlStatus::IoError,
        _ => HlStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> HlStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Run a closure, translating panics and errors into status codes.
fn guarded(f: impl FnOnce() -> Result<(), HlStatus>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            HlStatus::Panic
        }
    }
}

/// Message of the most recent error on this thread, or NULL when no error has
/// occurred. Free with [`hl_string_free`].
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must be a pointer returned by [`hl_last_error_message`] (or NULL) that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Sample a graph. `transition_p0` is only read for the two-stage scheme.
/// On success writes a new handle to `out`; free it with [`hl_graph_free`].
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_sample(
    scheme: HlScheme,
    n: usize,
    m: usize,
    seed: u64,
    transition_p0: f64,
    out: *mut *mut HlGraph,
) -> HlStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null".to_string());
            return Err(HlStatus::NullArgument);
        }
        let mut spec = SamplerSpec::new(scheme.into(), n, m, seed);
        if matches!(scheme, HlScheme::TwoStage) {
            spec = spec.with_transition(transition_p0);
        }
        let graph = sampling::sample(&spec).map_err(fail)?;
        unsafe { *out = Box::into_raw(Box::new(HlGraph { inner: graph })) };
        Ok(())
    })
}

/// Build a graph by aggregating a comparison-record CSV
/// (`i,j,value,annotator`) over `n` vertices.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` as in
/// [`hl_graph_sample`].
#[no_mangle]
pub unsafe extern "C" fn hl_graph_from_records_csv(
    path: *const c_char,
    n: usize,
    out: *mut *mut HlGraph,
) -> HlStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            set_error("null argument".to_string());
            return Err(HlStatus::NullArgument);
        }
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8".to_string());
                return Err(HlStatus::InvalidArgument);
            }
        };
        let records = io::read_records_csv(Path::new(path)).map_err(fail)?;
        let graph = PairGraph::from_records(n, &records).map_err(fail)?;
        unsafe { *out = Box::into_raw(Box::new(HlGraph { inner: graph })) };
        Ok(())
    })
}

/// Release a graph handle. NULL is a no-op.
///
/// # Safety
/// `g` must be a handle returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_free(g: *mut HlGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

unsafe fn borrow<'a>(g: *const HlGraph) -> Result<&'a PairGraph, HlStatus> {
    if g.is_null() {
        set_error("graph handle is null".to_string());
        return Err(HlStatus::NullArgument);
    }
    Ok(&unsafe { &*g }.inner)
}

/// Number of vertices.
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_vertex_count(g: *const HlGraph, out: *mut usize) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        unsafe { *out = graph.vertex_count() };
        Ok(())
    })
}

/// Number of distinct edges.
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_edge_count(g: *const HlGraph, out: *mut usize) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        unsafe { *out = graph.edge_count() };
        Ok(())
    })
}

/// Total edge weight (the number of draws for with-replacement samples).
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_total_weight(g: *const HlGraph, out: *mut f64) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        unsafe { *out = graph.total_weight() };
        Ok(())
    })
}

/// Minimal weighted degree.
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_min_degree(g: *const HlGraph, out: *mut f64) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        unsafe { *out = graph.min_degree() };
        Ok(())
    })
}

/// 1 if the graph is connected, 0 otherwise.
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_is_connected(g: *const HlGraph, out: *mut i32) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        unsafe { *out = i32::from(graph.is_connected()) };
        Ok(())
    })
}

/// Fiedler value (algebraic connectivity) of the graph Laplacian.
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_fiedler_value(g: *const HlGraph, out: *mut f64) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let summary = spectral::fiedler(graph).map_err(fail)?;
        unsafe { *out = summary.fiedler_value };
        Ok(())
    })
}

/// Global scores of a connected graph. `scores` must hold `len >= n` doubles;
/// `residual_norm` (optional) receives the solver residual.
/// # Safety
/// `g` must be a live handle; `scores` must be valid for writing `len`
/// doubles; `residual_norm` may be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_rank(
    g: *const HlGraph,
    scores: *mut f64,
    len: usize,
    residual_norm: *mut f64,
) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if scores.is_null() {
            set_error("scores pointer is null".to_string());
            return Err(HlStatus::NullArgument);
        }
        let n = graph.vertex_count();
        if len < n {
            set_error(format!("scores buffer holds {len} < {n} entries"));
            return Err(HlStatus::BufferTooSmall);
        }
        let score = hodge::hodge_rank(graph).map_err(fail)?;
        let out = unsafe { std::slice::from_raw_parts_mut(scores, n) };
        out.copy_from_slice(score.x.as_slice());
        if !residual_norm.is_null() {
            unsafe { *residual_norm = score.residual_norm };
        }
        Ok(())
    })
}

/// Sensitivity certificate `1 / lambda_2`.
/// # Safety
/// `g` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_sensitivity(g: *const HlGraph, out: *mut f64) -> HlStatus {
    guarded(|| {
        let graph = unsafe { borrow(g) }?;
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let s = hodge::sensitivity(graph).map_err(fail)?;
        unsafe { *out = s };
        Ok(())
    })
}

/// Root of `p0 - 1 = a p0 (1 - ln a)` on (0, 1).
/// # Safety
/// `out` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn hl_solve_a(p0: f64, out: *mut f64) -> HlStatus {
    guarded(|| {
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let a = spectral::solve_a(p0).map_err(fail)?;
        unsafe { *out = a };
        Ok(())
    })
}

/// Finite-size estimate of the normalized Fiedler value under sampling with
/// replacement, for the budget `m` on `n` vertices.
/// # Safety
/// `out` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn hl_estimate_with_replacement(n: usize, m: f64, out: *mut f64) -> HlStatus {
    guarded(|| {
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let inputs = spectral::EstimatorInputs::from_budget(n, m).map_err(fail)?;
        let a = spectral::estimate_with_replacement(&inputs).map_err(fail)?;
        unsafe { *out = a };
        Ok(())
    })
}

/// Finite-size estimate of the normalized Fiedler value under sampling
/// without replacement.
/// # Safety
/// `out` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn hl_estimate_without_replacement(
    n: usize,
    m: f64,
    out: *mut f64,
) -> HlStatus {
    guarded(|| {
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let inputs = spectral::EstimatorInputs::from_budget(n, m).map_err(fail)?;
        let a = spectral::estimate_without_replacement(&inputs).map_err(fail)?;
        unsafe { *out = a };
        Ok(())
    })
}

/// Tail-bound exponent function `H(a) = a - a ln(a) - 1`.
/// # Safety
/// `out` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn hl_entropy_h(a: f64, out: *mut f64) -> HlStatus {
    guarded(|| {
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let h = spectral::entropy_h(a).map_err(fail)?;
        unsafe { *out = h };
        Ok(())
    })
}

/// Union-bound estimate of `P(d_min <= 2am/n)` under sampling with
/// replacement.
/// # Safety
/// `out` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn hl_min_degree_tail_bound(
    n: usize,
    m: f64,
    a: f64,
    out: *mut f64,
) -> HlStatus {
    guarded(|| {
        if out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let b = spectral::min_degree_tail_bound(n, m, a).map_err(fail)?;
        unsafe { *out = b };
        Ok(())
    })
}

/// Chernoff-Hoeffding tail bounds for a sample mean; see the library docs for
/// which side each value covers.
/// # Safety
/// `lower_out` and `upper_out` must be valid for writing one double each.
#[no_mangle]
pub unsafe extern "C" fn hl_chernoff_bounds(
    n_trials: usize,
    mu: f64,
    k: f64,
    lower_out: *mut f64,
    upper_out: *mut f64,
) -> HlStatus {
    guarded(|| {
        if lower_out.is_null() || upper_out.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let (lo, hi) = spectral::chernoff_bounds(n_trials, mu, k).map_err(fail)?;
        unsafe {
            *lower_out = lo;
            *upper_out = hi;
        }
        Ok(())
    })
}

/// Uniform `[0,1]` ground-truth scores for simulation studies. `scores` must
/// hold `n` doubles.
/// # Safety
/// `scores` must be valid for writing `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_generate_ground_truth(
    n: usize,
    seed: u64,
    scores: *mut f64,
) -> HlStatus {
    guarded(|| {
        if scores.is_null() {
            return Err(HlStatus::NullArgument);
        }
        let truth = experiments::generate_ground_truth(n, seed);
        let out = unsafe { std::slice::from_raw_parts_mut(scores, n) };
        out.copy_from_slice(&truth.scores);
        Ok(())
    })
}
