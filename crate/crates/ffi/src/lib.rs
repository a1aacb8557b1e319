//! C ABI for the matchstat library: opaque graph handles, status codes,
//! and decimal-string results for exact big-integer counts. The header
//! is generated into include/matchstat.h by cbindgen at build time.
//!
//! Conventions: every fallible function returns [`MsStatus`] and writes
//! its result through an out-pointer, which is left untouched on error.
//! String results are heap-allocated and must be released with
//! [`ms_string_free`]. [`ms_last_error`] describes the most recent
//! failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use matchstat::count::{count_l_matchings_sparse, count_matchings};
use matchstat::formulas::{self, ModelParams};
use matchstat::graph::{gnm_sample, gnp_sample, Graph, SeedSpec};
use matchstat::Error;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapExceeded = 3,
    IoError = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MsStatus {
    match err {
        Error::InvalidInput(_) | Error::SwitchChoice { .. } | Error::ZeroExclusion { .. } => {
            MsStatus::InvalidArgument
        }
        Error::CapExceeded(_) | Error::NoBackend { .. } => MsStatus::CapExceeded,
        Error::Io(_) => MsStatus::IoError,
    }
}

fn fail(err: &Error) -> MsStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Run a fallible body, translating panics into InternalError.
fn guarded<F: FnOnce() -> MsStatus>(body: F) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MsStatus::InternalError
        }
    }
}

/// Opaque graph handle.
pub struct MsGraph {
    inner: Graph,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Message for the most recent error on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a matchstat function, or
/// NULL, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn give_string(out: *mut *mut c_char, s: String) -> MsStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            MsStatus::Ok
        }
        Err(_) => {
            set_error("result contained an interior NUL");
            MsStatus::InternalError
        }
    }
}

fn give_graph(out: *mut *mut MsGraph, g: Graph) -> MsStatus {
    let boxed = Box::new(MsGraph { inner: g });
    unsafe { *out = Box::into_raw(boxed) };
    MsStatus::Ok
}

/// Create an empty graph on n >= 1 vertices.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_empty(n: u32, out: *mut *mut MsGraph) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| {
        if n == 0 {
            set_error("graph needs at least one vertex");
            return MsStatus::InvalidArgument;
        }
        give_graph(out, Graph::empty(n))
    })
}

/// Create the complete graph K_n.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_complete(n: u32, out: *mut *mut MsGraph) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| {
        if n == 0 {
            set_error("graph needs at least one vertex");
            return MsStatus::InvalidArgument;
        }
        give_graph(out, Graph::complete(n))
    })
}

/// Add the edge {u, v}.
///
/// # Safety
/// `g` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_add_edge(g: *mut MsGraph, u: u32, v: u32) -> MsStatus {
    if g.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| match (*g).inner.add_edge(u, v) {
        Ok(()) => MsStatus::Ok,
        Err(e) => fail(&e),
    })
}

/// Parse the text format ("n m" header, then "u v" lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_parse(text: *const c_char, out: *mut *mut MsGraph) -> MsStatus {
    if text.is_null() || out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| {
        let s = match CStr::from_ptr(text).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("graph text is not valid UTF-8");
                return MsStatus::InvalidArgument;
            }
        };
        match Graph::from_text(s) {
            Ok(g) => give_graph(out, g),
            Err(e) => fail(&e),
        }
    })
}

/// Serialize a graph into the text format.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid. Free the result with
/// [`ms_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ms_graph_to_text(g: *const MsGraph, out: *mut *mut c_char) -> MsStatus {
    if g.is_null() || out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| give_string(out, (*g).inner.to_text()))
}

/// Vertex count.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_n(g: *const MsGraph, out: *mut u32) -> MsStatus {
    if g.is_null() || out.is_null() {
        return MsStatus::NullPointer;
    }
    *out = (*g).inner.n();
    MsStatus::Ok
}

/// Edge count.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_edge_count(g: *const MsGraph, out: *mut u64) -> MsStatus {
    if g.is_null() || out.is_null() {
        return MsStatus::NullPointer;
    }
    *out = (*g).inner.edge_count() as u64;
    MsStatus::Ok
}

/// Release a graph handle.
///
/// # Safety
/// `g` must be a handle from this library, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn ms_graph_free(g: *mut MsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Sample G(n, p) deterministically from (seed, stream).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_gnp_sample(
    n: u32,
    p: f64,
    seed: u64,
    stream: u64,
    out: *mut *mut MsGraph,
) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| {
        if n == 0 || !(0.0..=1.0).contains(&p) {
            set_error("need n >= 1 and p in [0, 1]");
            return MsStatus::InvalidArgument;
        }
        give_graph(out, gnp_sample(n, p, &SeedSpec::new(seed, stream)))
    })
}

/// Sample G(n, m) deterministically from (seed, stream).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_gnm_sample(
    n: u32,
    m: u64,
    seed: u64,
    stream: u64,
    out: *mut *mut MsGraph,
) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| {
        if n == 0 {
            set_error("need n >= 1");
            return MsStatus::InvalidArgument;
        }
        match gnm_sample(n, m, &SeedSpec::new(seed, stream)) {
            Ok(g) => give_graph(out, g),
            Err(e) => fail(&e),
        }
    })
}

/// Exact matching-count vector as a JSON array of decimal strings
/// ["m_0", "m_1", ...]; n_cap bounds the polynomial kernel.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid. Free the result with
/// [`ms_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ms_count_matchings_json(
    g: *const MsGraph,
    n_cap: u32,
    out: *mut *mut c_char,
) -> MsStatus {
    if g.is_null() || out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| match count_matchings(&(*g).inner, n_cap) {
        Ok(cv) => {
            let parts: Vec<String> = cv.counts().iter().map(|c| format!("\"{c}\"")).collect();
            give_string(out, format!("[{}]", parts.join(",")))
        }
        Err(e) => fail(&e),
    })
}

/// Exact number of l-matchings (l <= 4, any graph size) as a decimal
/// string.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid. Free the result with
/// [`ms_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ms_count_l_matchings(
    g: *const MsGraph,
    l: u64,
    out: *mut *mut c_char,
) -> MsStatus {
    if g.is_null() || out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| match count_l_matchings_sparse(&(*g).inner, l as usize) {
        Ok(c) => give_string(out, c.to_string()),
        Err(e) => fail(&e),
    })
}

/// Exact number of ordered pairs of l-matchings of K_n sharing exactly i
/// edges, as a decimal string.
///
/// # Safety
/// `out` must be a valid pointer. Free the result with
/// [`ms_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ms_pair_count(
    n: u64,
    l: u64,
    i: u64,
    out: *mut *mut c_char,
) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    guarded(|| match formulas::pair_count_exact(n, l, i) {
        Ok(c) => give_string(out, c.to_string()),
        Err(e) => fail(&e),
    })
}

fn with_params<F: FnOnce(&ModelParams) -> f64>(
    n: u32,
    l: u32,
    p: f64,
    out: *mut f64,
    f: F,
) -> MsStatus {
    guarded(|| match ModelParams::new(n, l, p) {
        Ok(params) => {
            unsafe { *out = f(&params) };
            MsStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

/// ln of the mean l-matching count under G(n,p).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_gnp_mean_ln(n: u32, l: u32, p: f64, out: *mut f64) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    with_params(n, l, p, out, |params| {
        formulas::gnp_mean(params).ln().unwrap_or(f64::NEG_INFINITY)
    })
}

/// ln of the asymptotic standard deviation sigma_bar.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_sigma_bar_ln(n: u32, l: u32, p: f64, out: *mut f64) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    with_params(n, l, p, out, |params| {
        formulas::sigma_bar(params).ln().unwrap_or(f64::NEG_INFINITY)
    })
}

/// Log-normal scale beta = l sqrt((1-p)/(p C(n,2))).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_beta(n: u32, l: u32, p: f64, out: *mut f64) -> MsStatus {
    if out.is_null() {
        return MsStatus::NullPointer;
    }
    with_params(n, l, p, out, formulas::beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    unsafe fn take_string(ptr: *mut c_char) -> String {
        let s = CStr::from_ptr(ptr).to_str().unwrap().to_string();
        ms_string_free(ptr);
        s
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(ms_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn count_four_cycle_through_abi() {
        unsafe {
            let mut g: *mut MsGraph = std::ptr::null_mut();
            assert_eq!(ms_graph_empty(4, &mut g), MsStatus::Ok);
            for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
                assert_eq!(ms_graph_add_edge(g, u, v), MsStatus::Ok);
            }
            let mut s: *mut c_char = std::ptr::null_mut();
            assert_eq!(ms_count_matchings_json(g, 28, &mut s), MsStatus::Ok);
            assert_eq!(take_string(s), r#"["1","4","2"]"#);
            let mut c: *mut c_char = std::ptr::null_mut();
            assert_eq!(ms_count_l_matchings(g, 2, &mut c), MsStatus::Ok);
            assert_eq!(take_string(c), "2");
            ms_graph_free(g);
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        unsafe {
            let text = CString::new("3 2\n0 1\n0 2\n").unwrap();
            let mut g: *mut MsGraph = std::ptr::null_mut();
            assert_eq!(ms_graph_parse(text.as_ptr(), &mut g), MsStatus::Ok);
            let mut s: *mut c_char = std::ptr::null_mut();
            assert_eq!(ms_graph_to_text(g, &mut s), MsStatus::Ok);
            assert_eq!(take_string(s), "3 2\n0 1\n0 2\n");
            ms_graph_free(g);

            let bad = CString::new("3 9\n0 1\n").unwrap();
            let mut g: *mut MsGraph = std::ptr::null_mut();
            assert_eq!(
                ms_graph_parse(bad.as_ptr(), &mut g),
                MsStatus::InvalidArgument
            );
            let msg = CStr::from_ptr(ms_last_error()).to_str().unwrap();
            assert!(msg.contains("claims"), "{msg}");
        }
    }

    #[test]
    fn samplers_deterministic_through_abi() {
        unsafe {
            let mut a: *mut MsGraph = std::ptr::null_mut();
            let mut b: *mut MsGraph = std::ptr::null_mut();
            assert_eq!(ms_gnp_sample(20, 0.4, 9, 1, &mut a), MsStatus::Ok);
            assert_eq!(ms_gnp_sample(20, 0.4, 9, 1, &mut b), MsStatus::Ok);
            let mut sa: *mut c_char = std::ptr::null_mut();
            let mut sb: *mut c_char = std::ptr::null_mut();
            ms_graph_to_text(a, &mut sa);
            ms_graph_to_text(b, &mut sb);
            assert_eq!(take_string(sa), take_string(sb));
            ms_graph_free(a);
            ms_graph_free(b);

            let mut g: *mut MsGraph = std::ptr::null_mut();
            assert_eq!(
                ms_gnm_sample(10, 100, 1, 1, &mut g),
                MsStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn formula_values_through_abi() {
        unsafe {
            let mut b = 0.0f64;
            assert_eq!(ms_beta(10, 5, 0.5, &mut b), MsStatus::Ok);
            assert!((b - 5.0 / 45f64.sqrt()).abs() < 1e-12);
            let mut lam = 0.0f64;
            assert_eq!(ms_gnp_mean_ln(4, 1, 0.5, &mut lam), MsStatus::Ok);
            assert!((lam - 3.0f64.ln()).abs() < 1e-12);
            assert_eq!(ms_beta(10, 9, 0.5, &mut b), MsStatus::InvalidArgument);
            let mut s: *mut c_char = std::ptr::null_mut();
            assert_eq!(ms_pair_count(4, 1, 1, &mut s), MsStatus::Ok);
            assert_eq!(take_string(s), "6");
        }
    }

    #[test]
    fn null_pointer_discipline() {
        unsafe {
            assert_eq!(
                ms_graph_empty(4, std::ptr::null_mut()),
                MsStatus::NullPointer
            );
            assert_eq!(
                ms_graph_add_edge(std::ptr::null_mut(), 0, 1),
                MsStatus::NullPointer
            );
            ms_graph_free(std::ptr::null_mut());
            ms_string_free(std::ptr::null_mut());
        }
    }
}
