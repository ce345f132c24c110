//! C ABI over the `critwalk` samplers and acceptance checks.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_sample` functions and released by the matching `*_free`. Every
//! fallible call returns a [`CwStatus`]; on failure the message is
//! available from [`cw_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use critwalk::cluster::{cluster_size_laplace, sample_conditioned_cluster, sample_uniform_tree};
use critwalk::harness::verify;
use critwalk::harness::StatReport;
use critwalk::rng::{rng_from_seed, SimRng};
use critwalk::stoch::sample_inverse_gaussian;
use critwalk::tree::{search_depth, tree_from_search_depth, OrderedRootedTree, SearchDepthCurve};
use critwalk::walk::{expected_exit_time_exact, sample_sigma_tilde};
use critwalk::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidCurve = 3,
    Config = 4,
    Io = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 8,
}

/// Seeded random stream.
pub struct CwRng(SimRng);

/// Finite ordered rooted tree.
pub struct CwTree(OrderedRootedTree);

/// Outcome of one acceptance criterion.
pub struct CwReport {
    report: StatReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CwStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidVertex(_)
        | Error::EmptyAnchors
        | Error::InsufficientSamples { .. } => CwStatus::InvalidArgument,
        Error::InvalidCurve(_) | Error::InvalidEncoding(_) => CwStatus::InvalidCurve,
        Error::Config(_) => CwStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => CwStatus::Io,
        _ => CwStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (CwStatus, String)>) -> CwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CwStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside critwalk");
            CwStatus::Panic
        }
    }
}

fn lib<T>(r: critwalk::Result<T>) -> Result<T, (CwStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null<T>(name: &str) -> Result<T, (CwStatus, String)> {
    Err((CwStatus::NullPointer, format!("{name} is null")))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (CwStatus, String)> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => null(name),
    }
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (CwStatus, String)> {
    match p.as_mut() {
        Some(r) => Ok(r),
        None => null(name),
    }
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), (CwStatus, String)> {
    if out.is_null() {
        return null(name);
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_rng_new(seed: u64, out: *mut *mut CwRng) -> CwStatus {
    guard(|| put(out, Box::into_raw(Box::new(CwRng(rng_from_seed(seed)))), "out"))
}

/// # Safety
/// `rng` must come from [`cw_rng_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_rng_free(rng: *mut CwRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// `E[exp(-lambda N_p)]` for the `T*` cluster size, `0 < p <= 1/2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_cluster_size_laplace(p: f64, lambda: f64, out: *mut f64) -> CwStatus {
    guard(|| put(out, lib(cluster_size_laplace(p, lambda))?, "out"))
}

/// One inverse-Gaussian draw with parameters `(delta, gamma)` at time `t`.
///
/// # Safety
/// `rng` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cw_sample_inverse_gaussian(
    rng: *mut CwRng,
    delta: f64,
    gamma: f64,
    t: f64,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        let rng = deref_mut(rng, "rng")?;
        if !(delta > 0.0 && gamma >= 0.0 && t >= 0.0) {
            return Err((CwStatus::InvalidArgument, "need delta > 0, gamma >= 0, t >= 0".into()));
        }
        put(out, sample_inverse_gaussian(delta, gamma, t, &mut rng.0), "out")
    })
}

/// Critical binary cluster conditioned on `n` vertices (`uniform == 0`), or
/// a uniform ordered tree on `n` vertices.
///
/// # Safety
/// `rng` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_sample(rng: *mut CwRng, n: usize, uniform: i32, out: *mut *mut CwTree) -> CwStatus {
    guard(|| {
        let rng = deref_mut(rng, "rng")?;
        let t = lib(if uniform != 0 {
            sample_uniform_tree(n, &mut rng.0)
        } else {
            sample_conditioned_cluster(n, &mut rng.0)
        })?;
        put(out, Box::into_raw(Box::new(CwTree(t))), "out")
    })
}

/// Rebuilds a tree from its search-depth curve of `len` values.
///
/// # Safety
/// `values` must point to `len` readable values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_from_search_depth(values: *const u32, len: usize, out: *mut *mut CwTree) -> CwStatus {
    guard(|| {
        if values.is_null() {
            return null("values");
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let t = lib(tree_from_search_depth(&SearchDepthCurve::from_values(v)))?;
        put(out, Box::into_raw(Box::new(CwTree(t))), "out")
    })
}

/// # Safety
/// `tree` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_free(tree: *mut CwTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_vertex_count(tree: *const CwTree) -> usize {
    tree.as_ref().map_or(0, |t| t.0.vertex_count())
}

/// Copies the search-depth curve into `buf`. `needed` receives the curve
/// length; a short buffer yields `CW_STATUS_BUFFER_TOO_SMALL` and nothing is
/// copied.
///
/// # Safety
/// `tree` and `needed` must be valid; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_search_depth(
    tree: *const CwTree,
    buf: *mut u32,
    cap: usize,
    needed: *mut usize,
) -> CwStatus {
    guard(|| {
        let t = deref(tree, "tree")?;
        let curve = search_depth(&t.0);
        put(needed, curve.values.len(), "needed")?;
        if cap < curve.values.len() {
            return Err((CwStatus::BufferTooSmall, format!("need {} values", curve.values.len())));
        }
        if buf.is_null() {
            return null("buf");
        }
        ptr::copy_nonoverlapping(curve.values.as_ptr(), buf, curve.values.len());
        Ok(())
    })
}

/// Expected exit time of the walk from the root through the planted edge.
///
/// # Safety
/// `tree` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_expected_exit_time(tree: *const CwTree, out: *mut f64) -> CwStatus {
    guard(|| put(out, expected_exit_time_exact(&deref(tree, "tree")?.0), "out"))
}

/// One exit time of the walk through the planted edge.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cw_tree_sample_exit_time(tree: *const CwTree, rng: *mut CwRng, out: *mut u64) -> CwStatus {
    guard(|| {
        let t = deref(tree, "tree")?;
        let rng = deref_mut(rng, "rng")?;
        put(out, sample_sigma_tilde(&t.0.adjacency(), &mut rng.0), "out")
    })
}

/// Runs acceptance criterion `criterion` (1 to 13). `replicates == 0`
/// keeps the preset count.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cw_verify(criterion: u32, seed: u64, replicates: usize, out: *mut *mut CwReport) -> CwStatus {
    guard(|| {
        let id = u8::try_from(criterion).map_err(|_| (CwStatus::Config, format!("no criterion {criterion}")))?;
        let mut cfg = lib(verify::preset(id, seed))?;
        if replicates > 0 {
            cfg.replicates = replicates;
        }
        let report = lib(verify::run_criterion(&cfg))?;
        let json = CString::new(report.to_json()).map_err(|e| (CwStatus::Internal, e.to_string()))?;
        put(out, Box::into_raw(Box::new(CwReport { report, json })), "out")
    })
}

/// 1 if every check passed, 0 otherwise (or for a null handle).
///
/// # Safety
/// `report` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cw_report_passed(report: *const CwReport) -> i32 {
    report.as_ref().map_or(0, |r| i32::from(r.report.passed()))
}

/// The report as JSON, owned by the handle.
///
/// # Safety
/// `report` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cw_report_json(report: *const CwReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` must come from [`cw_verify`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_report_free(report: *mut CwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
