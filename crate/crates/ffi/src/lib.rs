//! C interface to the raks engine.
//!
//! Indexes are opaque handles created by `raks_index_load` and released with
//! `raks_index_free`. Every fallible call returns a `RaksStatus`; on failure
//! `raks_last_error` describes the error for the calling thread. Strings
//! returned through out-parameters must be released with `raks_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use raks::output::{ParamsEcho, QueryEcho, RenderContext, ResultDocument};
use raks::{IndexBundle, Query, RaksError, ScoreParams, SearchParams};

/// Opaque loaded index.
pub struct RaksIndex {
    bundle: IndexBundle,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaksStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    BadIndex = 4,
    InvalidQuery = 5,
    Unresolved = 6,
    InvalidParams = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaksQueryParams {
    pub topk: u32,
    /// 0 means equal to `topk`.
    pub beam: u32,
    pub gamma: f64,
    pub max_level: u32,
    /// 0 means one per available core.
    pub threads: u32,
    /// Non-positive means no limit.
    pub time_limit_s: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: RaksStatus, msg: impl Into<String>) -> RaksStatus {
    set_error(msg);
    status
}

fn status_of(err: &RaksError) -> RaksStatus {
    match err {
        RaksError::Io(_) => RaksStatus::Io,
        RaksError::BadMagic | RaksError::UnsupportedVersion(_) | RaksError::Corrupt(_) => {
            RaksStatus::BadIndex
        }
        RaksError::KeywordUnresolved(_) | RaksError::Unresolved(_) => RaksStatus::Unresolved,
        RaksError::InvalidQuery(_) | RaksError::InvalidKeyword(_) => RaksStatus::InvalidQuery,
        RaksError::InvalidParams(_) | RaksError::LevelOutOfRange { .. } => RaksStatus::InvalidParams,
        _ => RaksStatus::Internal,
    }
}

fn guarded(f: impl FnOnce() -> RaksStatus) -> RaksStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(RaksStatus::Panic, "panic inside raks"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, RaksStatus> {
    if p.is_null() {
        return Err(fail(RaksStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(RaksStatus::InvalidUtf8, "string is not valid UTF-8"))
}

unsafe fn read_str_array(p: *const *const c_char, n: usize) -> Result<Vec<String>, RaksStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(fail(RaksStatus::NullPointer, "null keyword array"));
    }
    std::slice::from_raw_parts(p, n).iter().map(|&s| read_str(s).map(str::to_owned)).collect()
}

/// Default query parameters.
#[no_mangle]
pub extern "C" fn raks_query_params_default() -> RaksQueryParams {
    let d = SearchParams::default();
    RaksQueryParams {
        topk: d.topk as u32,
        beam: 0,
        gamma: d.score.gamma(),
        max_level: d.max_level,
        threads: 0,
        time_limit_s: d.time_limit.map_or(0.0, |t| t.as_secs_f64()),
    }
}

/// Loads an index file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn raks_index_load(path: *const c_char, out: *mut *mut RaksIndex) -> RaksStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RaksStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let path = match read_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match raks::load_index(path) {
            Ok(bundle) => {
                *out = Box::into_raw(Box::new(RaksIndex { bundle }));
                RaksStatus::Ok
            }
            Err(e) => fail(status_of(&e), format!("{path}: {e}")),
        }
    })
}

/// Releases an index. Null is ignored.
///
/// # Safety
/// `index` must come from `raks_index_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn raks_index_free(index: *mut RaksIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// # Safety
/// `index` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn raks_index_node_count(index: *const RaksIndex) -> usize {
    index.as_ref().map_or(0, |i| i.bundle.graph.node_count())
}

/// Number of directed edges, inverse edges included.
///
/// # Safety
/// `index` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn raks_index_edge_count(index: *const RaksIndex) -> usize {
    index.as_ref().map_or(0, |i| i.bundle.graph.edge_count())
}

fn search_params(p: &RaksQueryParams) -> Result<SearchParams, RaksError> {
    let topk = p.topk as usize;
    let params = SearchParams {
        topk,
        beam: if p.beam == 0 { topk } else { p.beam as usize },
        score: ScoreParams::new(p.gamma, Default::default())?,
        max_level: p.max_level,
        threads: if p.threads == 0 { SearchParams::default().threads } else { p.threads as usize },
        time_limit: (p.time_limit_s > 0.0 && p.time_limit_s.is_finite())
            .then(|| Duration::from_secs_f64(p.time_limit_s)),
        termination: Default::default(),
    };
    params.validate()?;
    Ok(params)
}

/// Runs a query and stores the JSON result document in `*out_json`.
/// `params` may be null for defaults.
///
/// # Safety
/// `index` must be a live handle; `central` must point to `n_central`
/// NUL-terminated strings and `marginal` to `n_marginal` (or be null when the
/// count is zero); `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn raks_query_json(
    index: *const RaksIndex,
    central: *const *const c_char,
    n_central: usize,
    marginal: *const *const c_char,
    n_marginal: usize,
    params: *const RaksQueryParams,
    out_json: *mut *mut c_char,
) -> RaksStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(RaksStatus::NullPointer, "null output pointer");
        }
        *out_json = ptr::null_mut();
        let Some(index) = index.as_ref() else {
            return fail(RaksStatus::NullPointer, "null index");
        };
        let (central, marginal) = match (read_str_array(central, n_central), read_str_array(marginal, n_marginal)) {
            (Ok(c), Ok(m)) => (c, m),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let raw = params.as_ref().copied().unwrap_or_else(|| raks_query_params_default());
        let params = match search_params(&raw) {
            Ok(p) => p,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let b = &index.bundle;
        let outcome = Query::new(central.clone(), marginal.clone())
            .and_then(|q| q.resolve(&b.text))
            .and_then(|q| b.engine().search(&q, &params));
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let ctx = RenderContext { graph: &b.graph, text: &b.text, weights: &b.weights, activations: &b.activations };
        let doc = ResultDocument::from_outcome(
            &ctx,
            QueryEcho { central, marginal },
            ParamsEcho::new(&params, None),
            &outcome,
        );
        let json = match serde_json::to_string(&doc).map(CString::new) {
            Ok(Ok(s)) => s,
            _ => return fail(RaksStatus::Internal, "failed to encode result document"),
        };
        *out_json = json.into_raw();
        RaksStatus::Ok
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn raks_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn raks_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
